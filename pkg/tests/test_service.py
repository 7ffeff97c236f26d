"""HTTP layer: request validation, report bodies, and error mapping."""

import asyncio

import httpx
import pytest

from bondopt.service import create_app


def _call(method, path, payload=None):
    transport = httpx.ASGITransport(app=create_app())

    async def go():
        async with httpx.AsyncClient(
            transport=transport, base_url="http://svc"
        ) as client:
            if method == "get":
                return await client.get(path)
            return await client.post(path, json=payload)

    return asyncio.run(go())


@pytest.fixture(scope="module")
def curves_csv():
    response = _call("post", "/generate",
                     {"seed": 7, "n_dates": 80, "months": 20})
    assert response.status_code == 200
    return response.json()["csv"]


@pytest.fixture(scope="module")
def base_request(curves_csv):
    return {
        "curves_csv": curves_csv,
        "grid": [2, 19],
        "max_lag": 8,
        "pade": {"m": 0, "n": 1, "k": 7},
        "trunc": 128,
    }


class TestHealth:
    def test_reports_version(self):
        response = _call("get", "/health")
        assert response.status_code == 200
        body = response.json()
        assert body["status"] == "ok"
        assert body["version"]


class TestEndpoints:
    def test_generate_is_deterministic(self):
        payload = {"seed": 3, "n_dates": 30, "months": 10}
        first = _call("post", "/generate", payload).json()
        second = _call("post", "/generate", payload).json()
        assert first == second
        assert first["csv"].startswith("date,tenor_years,yield")

    def test_estimate(self, base_request):
        body = {k: base_request[k] for k in ("curves_csv", "grid", "max_lag")}
        response = _call("post", "/estimate", body)
        assert response.status_code == 200
        table = response.json()["correlation"]
        assert table["actual"][0] == 1.0
        assert len(table["lags"]) == 9

    def test_fit_reports_rational(self, base_request):
        body = dict(base_request)
        body.pop("trunc")
        response = _call("post", "/fit", body)
        assert response.status_code == 200
        fit = response.json()["fit"]
        assert fit["numerator"] == [1.0]
        assert len(fit["denominator"]) == 2

    def test_factorize_reports_interval(self, base_request):
        response = _call("post", "/factorize", base_request)
        assert response.status_code == 200
        body = response.json()
        assert 0.0 < body["symbol"]["circle_min"] <= body["symbol"]["circle_max"]
        assert body["factorization"]["plus_expansion_head"][0] != 0.0

    def test_optimize_sum_to_one(self, base_request):
        body = dict(base_request, gamma=0.5, sum_to_one=True)
        response = _call("post", "/optimize", body)
        assert response.status_code == 200
        allocation = response.json()["allocation"]
        assert allocation["gamma"] == "sum-to-one"
        assert sum(allocation["raw"]) == pytest.approx(1.0, abs=1e-9)

    def test_check_arbitrage(self, base_request):
        body = dict(base_request, threshold=2.0)
        response = _call("post", "/check-arbitrage", body)
        assert response.status_code == 200
        arb = response.json()["arbitrage"]
        assert arb["invertible"] is True
        assert arb["classical_arbitrage"] == "absent"

    def test_backtest(self, base_request):
        body = dict(base_request, window=24)
        response = _call("post", "/backtest", body)
        assert response.status_code == 200
        report = response.json()
        assert report["mode"] == "walk-forward"
        # 80 dates -> 79 return rows -> 55 out-of-sample months
        assert len(report["dates"]) == 55
        assert set(report["summary"]) == {"optimal", "benchmark"}

    def test_pipeline_data_mode(self, base_request):
        body = dict(base_request, gamma=0.5, sum_to_one=True, window=24)
        response = _call("post", "/pipeline", body)
        assert response.status_code == 200
        report = response.json()
        assert report["mode"] == "data"
        assert report["backtest"] is not None
        assert report["arbitrage"]["quadratic_form"] is not None

    def test_pipeline_model_mode(self):
        response = _call("post", "/pipeline",
                         {"model": {"alpha": 0.5, "beta": 0.25}})
        assert response.status_code == 200
        report = response.json()
        assert report["mode"] == "model"
        assert report["backtest"] is None
        assert report["allocation"]["utility"] == pytest.approx(
            report["closed_form_utility"], abs=1e-8)


class TestValidation:
    def test_pade_n_zero_rejected_before_computation(self, base_request):
        body = dict(base_request)
        body["pade"] = {"m": 0, "n": 0, "k": 5}
        response = _call("post", "/fit", body)
        assert response.status_code == 422

    def test_trunc_must_dominate_orders(self, base_request):
        body = dict(base_request)
        body["pade"] = {"m": 2, "n": 3, "k": 7}
        body["trunc"] = 16
        response = _call("post", "/factorize", body)
        assert response.status_code == 422

    def test_grid_needs_two_maturities(self, base_request):
        body = {k: base_request[k] for k in ("curves_csv", "max_lag")}
        body["grid"] = [5, 5]
        response = _call("post", "/estimate", body)
        assert response.status_code == 422

    def test_pipeline_requires_input_or_model(self):
        response = _call("post", "/pipeline", {"grid": [2, 19]})
        assert response.status_code == 422

    def test_model_alpha_bounds(self):
        response = _call("post", "/pipeline",
                         {"model": {"alpha": 1.0, "beta": 0.2}})
        assert response.status_code == 422

    def test_gamma_must_be_positive(self, base_request):
        body = dict(base_request, gamma=0.0)
        response = _call("post", "/optimize", body)
        assert response.status_code == 422


class TestErrorMapping:
    def test_parse_error_maps_to_validation_detail(self):
        body = {"curves_csv": "date,tenor_years,yield\n2020-01-01,0.25,zzz\n",
                "grid": [2, 5], "max_lag": 2}
        response = _call("post", "/estimate", body)
        assert response.status_code == 400
        detail = response.json()["detail"]
        assert detail["kind"] == "validation"
        assert detail["stage"] == "load"
        assert detail["error"] == "ParseError"
        assert "line 2" in detail["message"]

    def test_numerical_error_carries_stage(self, curves_csv):
        # max_lag fits, but zero-volatility synthetic data fails estimation
        flat = _call("post", "/generate",
                     {"seed": 5, "n_dates": 40, "months": 14,
                      "shock_vol": 0.0}).json()["csv"]
        response = _call("post", "/estimate",
                         {"curves_csv": flat, "grid": [2, 13], "max_lag": 5})
        assert response.status_code == 400
        detail = response.json()["detail"]
        assert detail["stage"] == "estimate"
        assert detail["error"] == "DegenerateMaturity"
