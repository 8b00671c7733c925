"""Tests for JSON payloads, config parsing, and run manifests."""

import dataclasses
import json
from math import pi

import numpy as np
import pytest

from pstsim import evolution, protocols, serialize
from pstsim.models import chains
from pstsim.models import device as device_models


# ----------------------------------------------------------------- canonical


def test_canonical_types():
    tree = {
        "a": np.float64(1.5),
        "b": np.int64(3),
        "c": np.bool_(True),
        "d": 1.0 + 2.0j,
        "e": np.array([1.0, 2.0]),
        "f": (1, 2),
        "g": None,
        "h": "text",
    }
    out = serialize.canonical(tree)
    assert out == {
        "a": 1.5,
        "b": 3,
        "c": True,
        "d": [1.0, 2.0],
        "e": [1.0, 2.0],
        "f": [1, 2],
        "g": None,
        "h": "text",
    }
    assert type(out["b"]) is int
    assert type(out["c"]) is bool


def test_canonical_rejects_unknown():
    with pytest.raises(TypeError):
        serialize.canonical(object())


def test_dump_json_deterministic():
    a = serialize.dump_json({"z": 1, "a": [1.0, 2.0j]})
    b = serialize.dump_json({"a": [1.0, 2.0j], "z": 1})
    assert a == b
    assert a.endswith("\n")
    assert json.loads(a) == {"a": [1.0, [0.0, 2.0]], "z": 1}


# --------------------------------------------------------------- round trips


def test_chain_round_trip(tmp_path):
    spec = chains.ChainSpec.pst(5, 640e-9, label="demo")
    spec = dataclasses.replace(
        spec,
        detunings=(0.0, 1e3, 0.0, -2e3, 0.0),
        zz=(-2 * pi * 100e3,) * 4,
    )
    path = tmp_path / "chain.json"
    serialize.write_json(path, serialize.chain_payload(spec))
    back = serialize.load_chain(path)
    np.testing.assert_allclose(back.couplings, spec.couplings, rtol=1e-15)
    np.testing.assert_allclose(back.zz, spec.zz, rtol=1e-15)
    np.testing.assert_allclose(back.detunings, spec.detunings, rtol=1e-15)
    assert back.tau == spec.tau
    assert back.label == spec.label


def test_device_round_trip(tmp_path):
    spec = device_models.default_device()
    path = tmp_path / "device.json"
    serialize.write_json(path, serialize.device_payload(spec))
    back = serialize.load_device(path)
    assert back == spec


def test_noise_round_trip(tmp_path):
    noise = evolution.NoiseSpec(t1=(12.1e-6, 53.2e-6), decay_convention="rate-2pi")
    path = tmp_path / "noise.json"
    serialize.write_json(path, serialize.noise_payload(noise))
    back = serialize.load_noise(path)
    assert back.t1 == noise.t1
    assert back.decay_convention == noise.decay_convention


def test_ghz_scenario_round_trip(tmp_path):
    scenario = protocols.paper_ghz_scenario()
    path = tmp_path / "scenario.json"
    serialize.write_json(path, serialize.scenario_payload(scenario))
    parsed = serialize.load_scenario(path)
    assert parsed["kind"] == "ghz"
    back = parsed["scenario"]
    assert back.n == scenario.n
    assert back.tau == scenario.tau
    np.testing.assert_allclose(back.t1, scenario.t1, rtol=1e-15)
    np.testing.assert_allclose(back.zeta, scenario.zeta, rtol=1e-15)
    assert back.decay_convention == scenario.decay_convention
    assert back.zz_application == scenario.zz_application


def test_parity_scenario_parse():
    data = {
        "schema_version": 1,
        "kind": "parity",
        "n": 6,
        "tau_s": 640e-9,
        "zeta_hz": [-100e3] * 5,
        "model": "zz",
        "label": "demo",
    }
    parsed = serialize.parse_scenario(data)
    assert parsed["kind"] == "parity"
    assert parsed["n"] == 6
    assert parsed["model"] == "zz"
    np.testing.assert_allclose(parsed["zeta"], [-2 * pi * 100e3] * 5, rtol=1e-15)


# -------------------------------------------------------------------- errors


def test_error_pointers():
    with pytest.raises(serialize.ConfigError, match="/couplings_hz"):
        serialize.parse_chain({"schema_version": 1, "couplings_hz": 3, "tau_s": 1e-6})
    with pytest.raises(serialize.ConfigError, match="/tau_s"):
        serialize.parse_chain(
            {"schema_version": 1, "couplings_hz": [1.0], "tau_s": -1.0}
        )
    payload = serialize.device_payload(device_models.default_device())
    payload["qubits"][2]["t1_s"] = -1.0
    with pytest.raises(serialize.ConfigError, match="/qubits/2/t1_s"):
        serialize.parse_device(payload)
    with pytest.raises(serialize.ConfigError, match="/t1_s"):
        serialize.parse_noise({"schema_version": 1, "t1_s": [1e-6, -1e-6]})
    with pytest.raises(serialize.ConfigError, match="/kind"):
        serialize.parse_scenario(
            {"schema_version": 1, "kind": "bogus", "n": 3, "tau_s": 1e-6}
        )


def test_schema_version_mismatch():
    with pytest.raises(serialize.ConfigError, match="/schema_version"):
        serialize.parse_chain(
            {"schema_version": 2, "couplings_hz": [1.0], "tau_s": 1e-6}
        )


def test_config_error_string():
    err = serialize.ConfigError("/x/y", "must be positive")
    assert str(err) == "/x/y: must be positive"


# ------------------------------------------------------------------ manifest


def test_manifest_payload_excludes_duration(tmp_path):
    manifest = serialize.RunManifest(
        command="pst",
        config={"n": 6},
        seed=3,
        version="1.0",
        outputs=["b.csv", "a.json"],
        duration_s=12.5,
    )
    d = manifest.as_dict()
    assert set(d) == {"schema_version", "command", "config", "seed", "version", "outputs"}
    assert d["outputs"] == ["a.json", "b.csv"]
    path = tmp_path / "manifest.json"
    manifest.write(path)
    assert json.loads(path.read_text()) == serialize.canonical(d)


def test_manifest_bytes_stable(tmp_path):
    kwargs = dict(command="x", config={"k": 1.0}, seed=None, version="1.0")
    a = serialize.RunManifest(outputs=["f.csv"], duration_s=0.1, **kwargs)
    b = serialize.RunManifest(outputs=["f.csv"], duration_s=99.0, **kwargs)
    pa, pb = tmp_path / "a.json", tmp_path / "b.json"
    a.write(pa)
    b.write(pb)
    assert pa.read_bytes() == pb.read_bytes()
