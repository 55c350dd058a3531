"""Smoke test for the double_solution extension module.

Build and install first, e.g.

    pip install --no-build-isolation -e crates/py

then run ``python python/smoke_test.py``.
"""

import cmath
import json
import math
import pathlib
import sys
import tempfile

import double_solution as ds


def check(name, ok, detail=""):
    print(f"{'ok  ' if ok else 'FAIL'} {name} {detail}")
    return ok


def main():
    results = []

    psi = ds.ComplexField.soliton(1.0, 1024, -40.0, 40.0)
    obs = psi.observables()
    results.append(check("soliton norm", abs(obs["N"] - 4.0) < 1e-10, f"N={obs['N']:.12f}"))

    final, times, norms, energies, norm_drift, energy_drift = ds.evolve(psi, 1.0, dt=1e-3, record_every=100)
    exact = ds.ComplexField.soliton(1.0, 1024, -40.0, 40.0, t=1.0)
    results.append(check("evolve norm drift", norm_drift < 1e-12, f"{norm_drift:.2e}"))
    results.append(check("evolve shape", final.shape_distance(exact) < 2e-6, f"{final.shape_distance(exact):.2e}"))
    results.append(check("records", len(times) == 11 and math.isclose(times[-1], 1.0)))

    p = ds.peregrine([0.0], 0.0)[0]
    results.append(check("peregrine peak", abs(p - 3.0) < 1e-14, str(p)))

    g = ds.sn_ground_state(norm=1.0, n=2048, r_max=40.0)
    results.append(check("sn ground energy", abs(g["E"] / -0.0543 - 1.0) < 0.02, f"E={g['E']:.6f}"))
    collapses, threshold = ds.collapse_criterion(1.0)
    results.append(check("collapse threshold", collapses and abs(threshold - 1.14**3) < 1e-12))

    s = ds.BipartiteState.schmidt_example()
    scan = dict(ds.BipartiteState.gap_scan(s, [1.0, 2.0]))
    results.append(check("born gap", scan[2.0] < 1e-12, f"{scan[2.0]:.1e}"))
    results.append(check("linear-rule gap", abs(scan[1.0] - (math.sqrt(2) - 4 / 3)) < 1e-12, f"{scan[1.0]:.6f}"))
    bell = ds.BipartiteState.bell()
    rho = bell.reduced_b()
    results.append(check("bell reduced state", abs(rho[0][0] - 0.5) < 1e-15 and abs(rho[0][1]) < 1e-15))
    try:
        ds.BipartiteState(2, 2, [1, 1, 1, 1])
        results.append(check("unnormalised state rejected", False))
    except ValueError:
        results.append(check("unnormalised state rejected", True))

    u = ds.resonant_wave([x * 0.5 for x in range(-400, 401)], -300.0, 0.6)
    results.append(check("resonant wave positive", min(u) >= 0.0 and max(u) > 0.1))
    summary = ds.track_resonance(0.6)
    results.append(check("product speeds", all(abs(a - b) < 1e-3 for a, b in zip(summary["post_speeds"], [0.36, 0.16])), str(summary["post_speeds"])))

    freqs, weights, crossings = ds.branch_frequencies(0.3, samples=1000, seed=3)
    se = math.sqrt(0.3 * 0.7 / 1000)
    results.append(check("branch frequencies", abs(freqs[0] - 0.3) < 4 * se and crossings == 0, str(freqs)))

    with tempfile.TemporaryDirectory() as tmp:
        cfg = pathlib.Path(tmp) / "scan.toml"
        cfg.write_text('experiment = "signaling-scan"\n')
        report = ds.run_config(str(cfg), overrides=["exponents=[1.0, 3.0]"], output_dir=tmp + "/out")
        on_disk = json.loads(pathlib.Path(report["report_path"]).read_text())
        results.append(check("run_config report", on_disk["manifest"] == ["gap_scan.csv"] and report["overrides"] == ["exponents=[1.0, 3.0]"]))

    f = ds.ComplexField([1j] + [0j] * 7, 0.0, 1.0)
    results.append(check("complex round trip", cmath.isclose(f.values[0], 1j) and len(f) == 8))

    failed = results.count(False)
    print(f"{len(results) - failed}/{len(results)} checks passed")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
