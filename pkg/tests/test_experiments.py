import pytest

from clickguide.experiments import SweepSpec, bench_clicks, bench_table, run_bench, run_sweep, sweep_csv
from clickguide.volume import make_phantom


def test_grid_sizes():
    assert len(SweepSpec(kinds=["disk", "heatmap"]).grid()) == 30
    assert len(SweepSpec(kinds=["edt"]).grid()) == 60
    assert len(SweepSpec(kinds=["adaptive"]).grid()) == 3
    assert len(SweepSpec(kinds=["gdt"], sigmas=[1], thetas=[10], p_values=[100]).grid()) == 1


def test_grid_collapse_is_logged(caplog):
    caplog.set_level("INFO")
    SweepSpec(kinds=["disk"]).grid()
    assert "theta axis collapsed for disk" in caplog.text


def test_spec_validation():
    with pytest.raises(ValueError):
        SweepSpec(kinds=[])
    with pytest.raises(ValueError):
        SweepSpec(sigmas=[-1])
    with pytest.raises(ValueError):
        SweepSpec(thetas=[100])
    with pytest.raises(ValueError):
        SweepSpec(p_values=[101])


def test_sweep_csv_is_deterministic():
    spec = dict(kinds=["disk", "edt"], sigmas=[1], thetas=[0, 30], p_values=[50, 100], n_clicks=2,
                phantoms=["sphere"], n_volumes=2, dims=(16, 16, 16), record_timings=False)
    a = sweep_csv(run_sweep(SweepSpec(**spec)))
    b = sweep_csv(run_sweep(SweepSpec(**spec)))
    assert a == b
    rows = a.splitlines()
    assert len(rows) == 1 + 2 + 4
    assert [r.split(",")[0] for r in rows[1:]] == ["disk"] * 2 + ["edt"] * 4


def test_bench_runs_and_counts_repetitions():
    res = run_bench([16], ["disk", "heatmap"], repetitions=3)
    assert [len(r.runs) for r in res] == [3, 3]
    assert all(r.p95 >= r.median >= 0 for r in res)
    assert "disk" in bench_table(res)
    with pytest.raises(ValueError):
        run_bench([16], ["disk"], repetitions=0)


def test_bench_clicks_inside_object():
    _, gt = make_phantom("sphere", (32, 32, 32))
    cs = bench_clicks(gt, 10, 0)
    assert len(cs) == 10 and all(gt.data[c.pos] for c in cs)
