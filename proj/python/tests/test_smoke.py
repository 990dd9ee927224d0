import json
import math

import numpy as np
import pytest

import tnet

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)


def test_dmrg_matches_exact_diagonalization():
    spec = tnet.tfi(8, 1.0, 1.0)
    res = tnet.dmrg(spec, tnet.DmrgConfig(max_bond=16, seed=3))
    assert res["converged"]
    assert res["energy"] == pytest.approx(tnet.oracle.ground_energy(spec), rel=1e-9)
    assert res["energy"] == pytest.approx(tnet.oracle.tfi_free_fermion_ground(8, 1.0, 1.0), rel=1e-9)
    psi = res["state"]
    assert psi.size == 8
    assert psi.norm() == pytest.approx(1.0, abs=1e-12)
    assert psi.energy(spec) == pytest.approx(res["energy"], rel=1e-12)
    assert all(psi.entropy(b) <= math.log(d) + 1e-10 for b, d in enumerate(psi.bond_dims))


def test_state_vector_and_observables():
    up = np.array([1, 0], dtype=complex)
    psi = tnet.product_state([up, up, up])
    v = psi.to_dense()
    assert v.shape == (8,)
    assert abs(v[0]) == pytest.approx(1.0)
    assert psi.expect(SZ, 1).real == pytest.approx(1.0)
    assert psi.correlator(SZ, 0, SZ, 2).real == pytest.approx(1.0)


def test_checkpoint_round_trip(tmp_path):
    psi = tnet.random_mps([2, 2, 3, 2], 3, 5)
    data = psi.to_bytes()
    assert data[:6] == b"TNMPS1"
    assert tnet.MPS.from_bytes(data).to_bytes() == data
    psi.save(tmp_path / "psi.tnmps")
    assert tnet.MPS.load(tmp_path / "psi.tnmps").to_bytes() == data
    with pytest.raises(tnet.CheckpointError):
        tnet.MPS.from_bytes(data[:-3])


def test_tebd_quench_tracks_dense_evolution():
    spec = tnet.tfi(6, 1.0, 1.0)
    up = np.array([1, 0], dtype=complex)
    psi = tnet.product_state([up] * 6)
    res = tnet.tebd(spec, psi, step=0.01, total_time=0.5, observables={"sz": SZ}, sample_every=50)
    h = tnet.oracle.hamiltonian(spec)
    w, u = np.linalg.eigh(h)
    v0 = psi.to_dense()
    vt = u @ (np.exp(-1j * w * 0.5) * (u.conj().T @ v0))
    z0 = np.kron(SZ, np.eye(32))
    assert res["times"][-1] == pytest.approx(0.5)
    assert res["observables"]["sz"][-1][0] == pytest.approx((vt.conj() @ z0 @ vt).real, abs=1e-4)
    assert max(abs(n - 1.0) for n in res["norms"]) < 1e-10


def test_thermal_state_matches_gibbs():
    spec = tnet.tfi(4, 1.0, 0.8)
    res = tnet.thermal_state(spec, beta=1.0, step=0.01, max_bond=16)
    assert res["energy"] == pytest.approx(tnet.oracle.gibbs_energy(spec, 1.0), rel=1e-4)
    hot = tnet.thermal_state(spec, beta=0.0)
    assert abs(tnet.thermal_expect(hot["state"], SX, 0)) < 1e-12


def test_ising_free_energy():
    res = tnet.ising_free_energy(0.3, "hotrg", chi=12, iterations=20)
    assert res["free_energy"] == pytest.approx(tnet.oracle.onsager_f(0.3), rel=1e-6)
    assert len(res["trace"]) == 20


def test_errors_are_python_exceptions():
    with pytest.raises(tnet.ConfigError):
        tnet.tfi(1, 1.0, 1.0)
    with pytest.raises(ValueError):
        tnet.DmrgConfig(max_bond=0)
    with pytest.raises(ValueError):
        tnet.ising_free_energy(0.3, "srg")


def test_run_writes_outputs(tmp_path):
    cfg = tmp_path / "trg.json"
    cfg.write_text(json.dumps({"seed": 1, "model": {"type": "ising2d", "beta": [0.3, 0.35]}, "trg": {"chi": 8, "iterations": 10}}))
    assert tnet.run("trg", cfg, tmp_path / "out") == 0
    lines = (tmp_path / "out" / "results.jsonl").read_text().splitlines()
    assert [json.loads(line)["params"]["model.beta"] for line in lines] == [0.3, 0.35]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"seed": 1, "model": {"type": "ising2d"}}))
    assert tnet.run("trg", bad, tmp_path / "bad") == 2
