"""Smoke test for the temgrid Python extension."""

import json
import math
import pathlib

import temgrid

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "crates" / "core" / "fixtures"


def close(a, b, tol=1e-9):
    return math.isclose(a, b, rel_tol=0.0, abs_tol=tol)


def main():
    ratio = temgrid.surplus_ratio(10.0, 4.0)
    assert close(ratio, 4.0 / 6.0)
    assert temgrid.surplus_ratio(3.0, 5.0) == 1.0
    c_ec = temgrid.export_tariff(0.5, 0.05, 0.20, -0.04)
    assert close(c_ec, 0.5 * (0.05 - 0.20) + 0.5 * -0.04)
    c_ic = temgrid.import_tariff(0.5, 0.05, 0.20, c_ec)
    assert close(c_ic, 0.20 + 0.5 * (0.05 - c_ec - 0.20))
    try:
        temgrid.export_tariff(1.5, 0.05, 0.20, -0.04)
    except ValueError:
        pass
    else:
        raise AssertionError("ratio above one accepted")

    bad = temgrid.validate_file(FIXTURES / "bad.json")
    assert any(v.startswith("grid-import-negative") for v in bad), bad

    scenario = temgrid.Scenario.load(FIXTURES / "community.json")
    assert scenario.validate() == []
    assert scenario.steps == 24 and len(scenario.building_names) == 4
    again = temgrid.Scenario.from_json(scenario.to_json())
    assert again.to_json() == scenario.to_json()

    prices = temgrid.price(scenario)
    assert len(prices) == scenario.steps
    mean_export = prices.mean_export_by_surplus(scenario) * 1e3
    assert -72.8 <= mean_export <= -35.8, mean_export

    solutions = [temgrid.solve(scenario, mode, prices) for mode in ("baseline", "individual", "community")]
    for s in solutions:
        assert s.verified, s.verification_failures
        assert not s.limit_reached
        total = sum(e - r for _, e, r in s.building_costs())
        assert close(total, s.objective_eur, 1e-6)
    baseline, individual, community = solutions
    assert baseline.ev_revenue_eur == 0.0
    assert community.objective_eur <= individual.objective_eur + 1e-6 <= baseline.objective_eur + 1e-6
    assert community.electricity_eur < individual.electricity_eur

    table = temgrid.summarize_costs(scenario, prices, solutions)
    costs = json.loads(table.to_json())
    assert close(costs["total"]["modes"]["community"]["objective_eur"], community.objective_eur, 1e-6)
    assert community.dispatch_csv().splitlines()[0].startswith("step,building")

    sessions = json.loads(temgrid.sample_ev_sessions(20, seed=7))
    assert len(sessions) == 20
    assert sessions == json.loads(temgrid.sample_ev_sessions(20, seed=7))

    print(table.to_text(), end="")
    print("smoke test passed")


if __name__ == "__main__":
    main()
