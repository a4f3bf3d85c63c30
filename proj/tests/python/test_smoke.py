import csv
import json
import math
import os
import subprocess

import pytest

import mir


@pytest.fixture(scope="module")
def sample():
    return mir.generate(1, 400, 11)


@pytest.fixture(scope="module")
def fitted(sample):
    x, y = sample
    return mir.fit(x, y, lambda_=1e-2, domain=(0.0, 10.0), seed=3)


def test_generate_is_deterministic():
    assert mir.generate(2, 50, 5) == mir.generate(2, 50, 5)
    x, y = mir.generate(2, 50, 5)
    assert len(x) == len(y) == 50
    assert all(0.0 <= v <= 10.0 for v in x)
    assert all(v > 0.0 for v in y)


def test_fit_band_is_ordered_and_continuous(fitted):
    band = fitted.band
    assert band.degree == 3 and band.smoothness == 2
    assert band.knots[0] == 0.0 and band.knots[-1] == 10.0
    assert band.min_gap(1000) >= -1e-6
    assert band.continuity_violation() <= 1e-6
    xs = [0.5 * k for k in range(21)]
    for lo, up, mid in zip(band.lower(xs), band.upper(xs), band.midpoint(xs)):
        assert mid == pytest.approx(0.5 * (lo + up))
    assert len(fitted.p_low) == len(fitted.p_up) == len(fitted.weights) > 0
    assert all(0.0 < lo < up < 1.0 for lo, up in zip(fitted.p_low, fitted.p_up))
    assert fitted.bandwidth > 0.0
    assert len(fitted.primal_residuals) == len(fitted.dual_residuals) >= 1000


def test_fit_shift_equivariance(sample):
    x, y = sample
    a = mir.fit(x, y, domain=(0.0, 10.0)).band
    b = mir.fit(x, [v + 7.5 for v in y], domain=(0.0, 10.0)).band
    xs = [0.1 * k for k in range(101)]
    for u, v in zip(a.upper(xs), b.upper(xs)):
        assert v - u == pytest.approx(7.5, abs=1e-6)


def test_model_json_round_trip(fitted, tmp_path):
    path = tmp_path / "model.json"
    path.write_text(fitted.model_json())
    doc = json.loads(path.read_text())
    assert doc["format"] == "mir-model"
    band = mir.load_model(str(path))
    xs = [0.37 * k for k in range(27)]
    assert band.upper(xs) == fitted.band.upper(xs)
    assert band.lower(xs) == fitted.band.lower(xs)


def test_oracle_helpers():
    mi = mir.true_mi_normal(1.0, 2.0)
    assert mi.low == pytest.approx(1.0 - 0.6744897501960817 * 2.0, abs=1e-12)
    ln = mir.true_mi_lognormal(0.0, 1.0)
    assert 0.0 < ln.low < ln.up
    si = mir.shortest_interval([1.0, 2.0, 3.0, 10.0], [1.0, 1.0, 1.0, 1.0], 0.5)
    assert (si.low, si.up) == (1.0, 2.0)
    assert mir.mcwc(0.4, 0.5) == 0.4
    assert mir.mcwc(1.0, 0.45, 0.5, 20.0) == pytest.approx(math.e)
    assert mir.select_bandwidth([0.1 * k for k in range(100)]) > 0.0


def test_rhythm_on_sine():
    x = [float(h) for h in range(241)]
    mid = [2.0 + math.sin(2.0 * math.pi * h / 28.0) for h in x]
    cycles = mir.detect_rhythms(x, mid)
    assert cycles
    assert all(abs(c["period"] - 28.0) <= 2.0 and c["class"] == "significant" for c in cycles)


def test_invalid_arguments_raise():
    with pytest.raises(ValueError):
        mir.fit([0.0, 1.0], [1.0], domain=(0.0, 1.0))
    with pytest.raises(ValueError):
        mir.fit([0.0, 1.0, 2.0], [1.0, 2.0, 3.0], alpha=1.5)
    with pytest.raises(mir.InvalidArgument):
        mir.generate(3, 10, 0)


@pytest.mark.skipif("MIR_CLI" not in os.environ, reason="CLI path not provided")
def test_cli_fit_band_rhythm(tmp_path, sample):
    cli = os.environ["MIR_CLI"]
    x, y = sample
    data = tmp_path / "data.csv"
    with data.open("w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["x", "y"])
        w.writerows(zip(x, y))
    model, band1, band2 = tmp_path / "m.json", tmp_path / "b1.csv", tmp_path / "b2.csv"
    subprocess.run([cli, "fit", "--in", str(data), "--out", str(model), "--band", str(band1)], check=True)
    subprocess.run([cli, "band", "--model", str(model), "--out", str(band2)], check=True)
    assert band1.read_text() == band2.read_text()
    with band1.open() as f:
        rows = list(csv.DictReader(f))
    assert len(rows) == 201
    assert all(float(r["upper"]) >= float(r["lower"]) - 1e-6 for r in rows)

    bad = subprocess.run([cli, "fit", "--in", str(tmp_path / "missing.csv"), "--out", str(model)],
                         capture_output=True, text=True)
    assert bad.returncode == 1
    assert bad.stderr.startswith("error: ")
    usage = subprocess.run([cli, "fit"], capture_output=True, text=True)
    assert usage.returncode == 2
