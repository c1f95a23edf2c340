"""Byte-level regression against checked-in outputs.

Regenerate with ``complab sweep --scenario NAME -o tests/golden/sweep_NAME.csv``
(and the matching ``sample`` / ``scenario show`` commands) after an
intentional numerical change.
"""

import csv
from pathlib import Path

import pytest

from complab import cli
from complab.povm_design import SCENARIOS

GOLDEN = Path(__file__).parent / "golden"


def _run(tmp_path, argv):
    out = tmp_path / "out"
    assert cli.main(argv + ["-o", str(out)]) == 0
    return out.read_bytes()


@pytest.mark.parametrize("name", SCENARIOS)
def test_sweep_matches_golden(tmp_path, name):
    assert _run(tmp_path, ["sweep", "--scenario", name]) == (GOLDEN / f"sweep_{name}.csv").read_bytes()


def test_sample_matches_golden(tmp_path):
    got = _run(tmp_path, ["sample", "--n", "3", "--count", "500", "--seed", "0"])
    assert got == (GOLDEN / "sample_n3_seed0.csv").read_bytes()


def test_scenario_show_matches_golden(tmp_path):
    assert _run(tmp_path, ["scenario", "show", "fig2a"]) == (GOLDEN / "scenario_fig2a.json").read_bytes()


def test_golden_constancy_mapping():
    # panel (b) keeps C_bar fixed over the whole grid, panel (c) keeps P_bar fixed
    def flags(name):
        rows = list(csv.DictReader(open(GOLDEN / f"sweep_{name}.csv")))
        return all(r["const_P"] == "true" for r in rows), all(r["const_C"] == "true" for r in rows)

    assert flags("fig2b") == (False, True)
    assert flags("fig2c") == (True, False)
