import io

import numpy as np
import pytest

from tickjoin.errors import BadConfig
from tickjoin.workload import (
    WorkloadConfig,
    _reflect,
    generate,
    read_run,
    write_run,
)

# upper 0.001 quantile of chi-square with 99 degrees of freedom
CHI2_99_CRIT = 148.2304


def run_text(run):
    buf = io.StringIO()
    write_run(run, buf)
    return buf.getvalue()


def positions(batch):
    return np.array([(o.position.x, o.position.y) for o in batch.objects])


def test_same_seed_same_bytes():
    cfg = WorkloadConfig(n_objects=100, n_ticks=5, region_side=100.0, query_side=(5.0, 20.0), seed=7)
    assert run_text(generate(cfg)) == run_text(generate(cfg))


def test_different_seed_differs():
    cfg = WorkloadConfig(n_objects=100, n_ticks=2, region_side=100.0, query_side=10.0, seed=7)
    other = WorkloadConfig(n_objects=100, n_ticks=2, region_side=100.0, query_side=10.0, seed=8)
    assert run_text(generate(cfg)) != run_text(generate(other))


@pytest.mark.parametrize("dist", ["uniform", "gaussian", "network"])
def test_positions_in_bounds_and_speed_capped(dist):
    cfg = WorkloadConfig(
        n_objects=200, n_ticks=6, region_side=1000.0, max_speed=50.0, query_side=50.0,
        distribution=dist, n_hotspots=3, grid_degree=5, seed=13,
    )
    run = generate(cfg)
    prev = None
    for batch in run.batches:
        pos = positions(batch)
        assert np.all(pos >= 0) and np.all(pos <= 1000.0)
        if prev is not None:
            dist_moved = np.hypot(*(pos - prev).T)
            assert np.all(dist_moved <= 50.0 + 1e-9)
        prev = pos


def test_zero_speed_freezes_everyone():
    cfg = WorkloadConfig(n_objects=50, n_ticks=3, region_side=100.0, max_speed=0.0, query_side=10.0, seed=1)
    run = generate(cfg)
    assert np.array_equal(positions(run.batches[0]), positions(run.batches[2]))


def test_reflection_folds_into_region():
    assert _reflect(np.array([-4.0]), 100.0)[0] == 4.0
    assert _reflect(np.array([104.0]), 100.0)[0] == 96.0
    assert _reflect(np.array([42.0]), 100.0)[0] == 42.0


def test_gaussian_axis_variance_tracks_sigma():
    cfg = WorkloadConfig(
        n_objects=10_000, n_ticks=1, region_side=22500.0,
        distribution="gaussian", n_hotspots=1, sigma=200.0, seed=5,
    )
    pos = positions(generate(cfg).batches[0])
    for axis in (0, 1):
        assert abs(pos[:, axis].var() - 200.0**2) < 0.2 * 200.0**2


def test_network_points_stay_on_grid_lines():
    cfg = WorkloadConfig(
        n_objects=300, n_ticks=5, region_side=1000.0, query_side=40.0,
        distribution="network", grid_degree=10, seed=2,
    )
    lines = np.arange(11) * 100.0
    for batch in generate(cfg).batches:
        pos = positions(batch)
        on_v = np.isin(pos[:, 0], lines)
        on_h = np.isin(pos[:, 1], lines)
        assert np.all(on_v | on_h)


def test_query_rate_one_queries_everything():
    cfg = WorkloadConfig(n_objects=120, n_ticks=2, region_side=500.0, query_side=(20.0, 50.0), seed=3)
    for batch in generate(cfg).batches:
        assert len(batch.queries) == 120
        assert sorted(q.issuer_id for q in batch.queries) == list(range(120))


def test_query_rate_zero_queries_nothing():
    cfg = WorkloadConfig(n_objects=120, n_ticks=2, region_side=500.0, query_side=10.0, query_rate=0.0, seed=3)
    assert all(not b.queries for b in generate(cfg).batches)


def test_fixed_query_side():
    cfg = WorkloadConfig(n_objects=40, n_ticks=1, region_side=1000.0, query_side=200.0, seed=4)
    for q in generate(cfg).batches[0].queries:
        assert q.rect.width == pytest.approx(200.0)
        assert q.rect.height == pytest.approx(200.0)


def test_queries_centered_on_issuers():
    cfg = WorkloadConfig(n_objects=40, n_ticks=1, region_side=1000.0, seed=4)
    batch = generate(cfg).batches[0]
    by_id = {o.id: o.position for o in batch.objects}
    for q in batch.queries:
        p = by_id[q.issuer_id]
        assert (q.rect.xa + q.rect.xb) / 2 == pytest.approx(p.x)
        assert (q.rect.ya + q.rect.yb) / 2 == pytest.approx(p.y)


def test_uniform_chi_square_over_coarse_grid():
    cfg = WorkloadConfig(n_objects=10_000, n_ticks=1, region_side=1000.0, query_side=10.0, seed=17)
    pos = positions(generate(cfg).batches[0])
    counts, _, _ = np.histogram2d(pos[:, 0], pos[:, 1], bins=10, range=[[0, 1000], [0, 1000]])
    expected = 10_000 / 100.0
    chi2 = float(((counts - expected) ** 2 / expected).sum())
    assert chi2 < CHI2_99_CRIT


def test_round_trip_preserves_batches():
    cfg = WorkloadConfig(n_objects=30, n_ticks=3, region_side=750.0, query_side=(30.0, 90.0),
                         seed=9, distribution="gaussian", n_hotspots=2)
    run = generate(cfg)
    text = run_text(run)
    back = read_run(io.StringIO(text))
    assert back.region_side == run.region_side
    assert back.batches == run.batches
    assert run_text(back) == text


def test_reader_rejects_foreign_header():
    with pytest.raises(BadConfig):
        read_run(io.StringIO("somethingelse 1 1 10\n"))


def test_config_validation():
    with pytest.raises(BadConfig):
        WorkloadConfig(n_objects=0).validate()
    with pytest.raises(BadConfig):
        WorkloadConfig(n_objects=1, query_rate=1.5).validate()
    with pytest.raises(BadConfig):
        WorkloadConfig(n_objects=1, query_side=(500.0, 200.0)).validate()
    with pytest.raises(BadConfig):
        WorkloadConfig(n_objects=1, distribution="clustered").validate()
