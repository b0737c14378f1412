import csv
import io

import numpy as np
import pytest

from mixclust.bench import (ExperimentGrid, RecoveryRow, ScalingRow, recovery_counts,
                            run_recovery_sweep, run_scaling_bench, write_rows)
from mixclust.rard import RardConfig


def test_grid_jobs_order_and_seeds():
    grid = ExperimentGrid(n=(100, 200), k=2, q=(0.0, 0.1), reps=2, seed=10)
    jobs = list(grid.jobs())
    assert jobs[:3] == [(100, 2, 0.0, 10), (100, 2, 0.0, 11), (100, 2, 0.1, 10)]
    assert len(jobs) == 8
    with pytest.raises(ValueError):
        ExperimentGrid(n=())
    with pytest.raises(ValueError):
        ExperimentGrid(reps=0)


def test_recovery_sweep_disconnected_blocks():
    grid = ExperimentGrid(n=(200,), k=(2,), q=(0.0,), p=0.5, reps=10)
    rows = run_recovery_sweep(grid)
    assert [r.seed for r in rows] == list(range(10))
    # with no cross edges a run can only recover the blocks or leave them merged
    for r in rows:
        assert r.recovered or r.nmi == 0.0
    assert recovery_counts(rows)[(200, 2, 0.0)] >= 8


def test_recovery_rows_reproducible():
    grid = ExperimentGrid(n=(150,), k=(3,), q=(0.02,), reps=3, seed=4)
    a = run_recovery_sweep(grid)
    b = run_recovery_sweep(grid)
    assert [(r.recovered, r.nmi, r.total_iterations) for r in a] == \
        [(r.recovered, r.nmi, r.total_iterations) for r in b]


def test_recovery_workers_match_serial():
    grid = ExperimentGrid(n=(120,), k=(2,), q=(0.01, 0.05), reps=2)
    serial = run_recovery_sweep(grid)
    pooled = run_recovery_sweep(grid, workers=2)
    assert [(r.q, r.seed, r.nmi, r.total_iterations) for r in serial] == \
        [(r.q, r.seed, r.nmi, r.total_iterations) for r in pooled]


def test_scaling_bench_shape():
    res = run_scaling_bench([200, 400], k=2, reps=2)
    assert len(res.rows) == 4
    assert set(res.medians) == {200, 400}
    assert np.isfinite(res.slope)
    # fixed expected degree: probabilities halve when n doubles
    p = {r.n: r.p for r in res.rows}
    assert p[400] == pytest.approx(p[200] / 2)
    assert res.ratio(400, 200) == res.medians[400] / res.medians[200]
    with pytest.raises(ValueError):
        run_scaling_bench([], reps=1)


def test_scaling_same_seed_same_iterations():
    a = run_scaling_bench([300], k=3, reps=2, seed=7)
    b = run_scaling_bench([300], k=3, reps=2, seed=7)
    assert [r.total_iterations for r in a.rows] == [r.total_iterations for r in b.rows]


def test_write_rows_csv(tmp_path):
    rows = [RecoveryRow(10, 2, 0.1, 0, True, 0.5, 0.25, 7)]
    text = write_rows(rows)
    parsed = list(csv.DictReader(io.StringIO(text)))
    assert parsed[0]["recovered"] == "1" and parsed[0]["q"] == "0.1"
    assert write_rows([], row_type=ScalingRow).strip() == "n,k,p,q,seed,seconds,total_iterations"
    with pytest.raises(ValueError):
        write_rows([])
    path = tmp_path / "rows.csv"
    write_rows(rows, path)
    assert path.read_text() == text
    buf = io.StringIO()
    write_rows(rows, buf)
    assert buf.getvalue() == text


def test_bench_uses_config_seed_per_job():
    cfg = RardConfig(eps0=1e-2, seed=999)
    rows = run_recovery_sweep(ExperimentGrid(n=(100,), k=(2,), q=(0.0,), reps=2), cfg)
    # the job seed, not cfg.seed, is what each row reports
    assert [r.seed for r in rows] == [0, 1]


def test_runtime_in_k_weak_bound():
    # more, smaller blocks should not cost much more; only a loose 2x bound
    cfg = RardConfig(eps0=1e-2)
    t5 = run_scaling_bench([1500], k=5, reps=5, cfg=cfg, fixed_degree=False).medians[1500]
    t10 = run_scaling_bench([1500], k=10, reps=5, cfg=cfg, fixed_degree=False).medians[1500]
    assert t10 <= 2.0 * t5
