"""Structured key-value text configs: material constants and run parameters.

Format: one ``key = value`` pair per line, ``#`` comments, blank lines
ignored.  Keys are dotted paths with a versioned schema; unknown keys are
errors so typos cannot silently change a design.  Units follow the library
conventions: SI except velocities in mm/us and the attenuation coefficient
in dB/us/GHz^2.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import materials as mat
from .bragg import DeviceGeometry
from .transducer import TransducerSpec

SCHEMA_VERSION = 1

_STIFFNESS_KEYS = ("c11", "c12", "c13", "c33", "c44", "c66")
_PHOTOELASTIC_KEYS = ("p11", "p12", "p13", "p31", "p33", "p44", "p66")


class ConfigError(ValueError):
    """Config parse or validation failure, with line diagnostics."""


def parse_kv_text(text: str, source: str = "<config>") -> dict[str, str]:
    pairs: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', "
                              f"got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or not value:
            raise ConfigError(f"{source}:{lineno}: empty key or value")
        if key in pairs:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        pairs[key] = value
    return pairs


def _take_float(pairs: dict[str, str], key: str, source: str,
                default: float | None = None) -> float:
    if key not in pairs:
        if default is None:
            raise ConfigError(f"{source}: missing required key {key!r}")
        return default
    raw = pairs.pop(key)
    try:
        return float(raw)
    except ValueError as err:
        raise ConfigError(f"{source}: key {key!r}: {raw!r} is not a number") \
            from err


def _fail_unknown(pairs: dict[str, str], source: str):
    if pairs:
        unknown = ", ".join(sorted(pairs))
        raise ConfigError(f"{source}: unknown keys: {unknown}")


def material_from_pairs(pairs: dict[str, str],
                        source: str = "<config>") -> mat.MaterialConstants:
    pairs = dict(pairs)
    version = int(_take_float(pairs, "schema_version", source, SCHEMA_VERSION))
    if version != SCHEMA_VERSION:
        raise ConfigError(f"{source}: unsupported schema_version {version}")
    name = pairs.pop("material.name", "custom")
    base = None
    if name == "TeO2":
        base = mat.teo2()

    def floatd(key, default):
        return _take_float(pairs, key, source, default)

    stiff = np.zeros((6, 6))
    defaults = base.stiffness if base is not None else None
    sv = {}
    for k in _STIFFNESS_KEYS:
        dflt = None if defaults is None else _stiffness_lookup(defaults, k)
        sv[k] = _take_float(pairs, f"stiffness.{k}", source, dflt)
    stiff[0, 0] = stiff[1, 1] = sv["c11"]
    stiff[2, 2] = sv["c33"]
    stiff[0, 1] = stiff[1, 0] = sv["c12"]
    stiff[0, 2] = stiff[2, 0] = stiff[1, 2] = stiff[2, 1] = sv["c13"]
    stiff[3, 3] = stiff[4, 4] = sv["c44"]
    stiff[5, 5] = sv["c66"]

    photo = np.zeros((6, 6))
    pdef = base.photoelastic if base is not None else np.zeros((6, 6))
    pv = {k: _take_float(pairs, f"photoelastic.{k}", source,
                         _photoelastic_lookup(pdef, k))
          for k in _PHOTOELASTIC_KEYS}
    photo[0, 0] = photo[1, 1] = pv["p11"]
    photo[0, 1] = photo[1, 0] = pv["p12"]
    photo[0, 2] = photo[1, 2] = pv["p13"]
    photo[2, 0] = photo[2, 1] = pv["p31"]
    photo[2, 2] = pv["p33"]
    photo[3, 3] = photo[4, 4] = pv["p44"]
    photo[5, 5] = pv["p66"]

    density = floatd("density", base.density if base else None)
    atten = floatd("attenuation", base.attenuation_coeff if base else None)
    p_eff = floatd("effective_photoelastic",
                   base.effective_photoelastic if base else None)

    indices = dict(base.indices) if base is not None else {}
    index_keys = [k for k in pairs if k.startswith("index.")]
    for key in index_keys:
        parts = key.split(".")
        if len(parts) != 3 or parts[2] not in ("no", "ne", "rotatory"):
            raise ConfigError(f"{source}: malformed index key {key!r}")
    lams = sorted({k.split(".")[1] for k in index_keys})
    for lam_s in lams:
        try:
            lam = float(lam_s)
        except ValueError:
            raise ConfigError(f"{source}: bad index wavelength {lam_s!r}")
        existing = indices.get(lam)
        if existing is None:
            n_o = _take_float(pairs, f"index.{lam_s}.no", source)
            n_e = _take_float(pairs, f"index.{lam_s}.ne", source)
            rot = _take_float(pairs, f"index.{lam_s}.rotatory", source)
        else:
            n_o = _take_float(pairs, f"index.{lam_s}.no", source,
                              existing.n_o)
            n_e = _take_float(pairs, f"index.{lam_s}.ne", source,
                              existing.n_e)
            rot = _take_float(pairs, f"index.{lam_s}.rotatory", source,
                              existing.rotatory_power)
        indices[lam] = mat.IndexEntry(n_o=n_o, n_e=n_e, rotatory_power=rot)
    if not indices:
        raise ConfigError(f"{source}: no refractive-index table given")

    _fail_unknown(pairs, source)
    try:
        return mat.MaterialConstants(
            name=name, stiffness=stiff, photoelastic=photo, density=density,
            indices=indices, attenuation_coeff=atten,
            effective_photoelastic=p_eff)
    except mat.InvalidMaterialError as err:
        raise ConfigError(f"{source}: {err}") from err


def _stiffness_lookup(stiff: np.ndarray, key: str) -> float:
    i, j = int(key[1]) - 1, int(key[2]) - 1
    return float(stiff[i, j])


def _photoelastic_lookup(photo: np.ndarray, key: str) -> float:
    i, j = int(key[1]) - 1, int(key[2]) - 1
    return float(photo[i, j])


def load_material(path: str | Path) -> mat.MaterialConstants:
    path = Path(path)
    return material_from_pairs(parse_kv_text(path.read_text(encoding="utf-8"),
                                             str(path)), str(path))


def dump_material(material: mat.MaterialConstants) -> str:
    lines = [f"schema_version = {SCHEMA_VERSION}",
             f"material.name = {material.name}",
             f"density = {material.density:.9g}",
             f"attenuation = {material.attenuation_coeff:.9g}",
             f"effective_photoelastic = {material.effective_photoelastic:.9g}"]
    for k in _STIFFNESS_KEYS:
        lines.append(f"stiffness.{k} = "
                     f"{_stiffness_lookup(material.stiffness, k):.9g}")
    for k in _PHOTOELASTIC_KEYS:
        lines.append(f"photoelastic.{k} = "
                     f"{_photoelastic_lookup(material.photoelastic, k):.9g}")
    for lam in material.wavelengths():
        entry = material.indices[lam]
        lam_s = f"{lam:g}"
        lines.append(f"index.{lam_s}.no = {entry.n_o:.9g}")
        lines.append(f"index.{lam_s}.ne = {entry.n_e:.9g}")
        lines.append(f"index.{lam_s}.rotatory = {entry.rotatory_power:.9g}")
    return "\n".join(lines) + "\n"


def _parse_range(raw: str, source: str, key: str) -> tuple[float, ...]:
    """'start:stop:step' inclusive range or comma list."""
    try:
        if ":" in raw:
            parts = [float(p) for p in raw.split(":")]
            if len(parts) != 3:
                raise ValueError
            start, stop, step = parts
            if step <= 0 or stop < start:
                raise ValueError
            n = int(round((stop - start) / step))
            return tuple(start + i * step for i in range(n + 1))
        return tuple(float(p) for p in raw.split(","))
    except ValueError:
        raise ConfigError(f"{source}: key {key!r}: bad range {raw!r}")


@dataclass
class RunConfig:
    """Everything a CLI command needs, parsed from one run-config file."""

    material: mat.MaterialConstants
    geometry: DeviceGeometry
    transducer: TransducerSpec
    wavelength_red_nm: float = 780.0
    wavelength_blue_nm: float = 480.0
    ripple_red_db: float = 0.5
    ripple_blue_db: float = 1.0
    hf_limit_mhz: float = 230.0
    fom_phi_o: tuple[float, ...] = tuple(float(x) for x in range(4, 15))
    fom_phi_a: tuple[float, ...] = tuple(x * 0.5 for x in range(0, 11))
    sweep_theta: tuple[float, ...] = tuple(float(x) for x in range(0, 181, 5))
    sweep_phi: tuple[float, ...] = (0.0, 45.0, 90.0)
    beam_diameter_mm: float = 3.0
    fourier_focal_mm: float = 42.0
    collimator_focal_mm: float = 400.0
    objective_focal_mm: float = 110.0
    trap_pitch_um: float = 8.0
    switch_beam_mm: float = 1.2
    cascade_bandwidth_mhz: float | None = None


def run_config_from_pairs(pairs: dict[str, str],
                          source: str = "<config>") -> RunConfig:
    pairs = dict(pairs)
    version = int(_take_float(pairs, "schema_version", source, SCHEMA_VERSION))
    if version != SCHEMA_VERSION:
        raise ConfigError(f"{source}: unsupported schema_version {version}")

    material_path = pairs.pop("material.path", None)
    material_keys = {k: v for k, v in pairs.items()
                     if k.startswith(("material.", "stiffness.",
                                      "photoelastic.", "index."))
                     or k in ("density", "attenuation",
                              "effective_photoelastic")}
    for k in material_keys:
        pairs.pop(k)
    if material_path is not None:
        if material_keys and set(material_keys) != {"material.name"}:
            raise ConfigError(f"{source}: material.path excludes inline "
                              "material keys")
        material = load_material(material_path)
    else:
        material_keys.setdefault("material.name", "TeO2")
        material = material_from_pairs(material_keys, source)

    geometry = DeviceGeometry(
        optical_rotation=_take_float(pairs, "geometry.optical_rotation_deg",
                                     source, 10.0),
        acoustic_rotation=_take_float(pairs, "geometry.acoustic_rotation_deg",
                                      source, 3.0),
        doppler_sign=int(_take_float(pairs, "geometry.doppler_sign",
                                     source, 1.0)),
        aperture_length=_take_float(pairs, "geometry.aperture_mm",
                                    source, 10.0))

    shape = pairs.pop("transducer.shape", "diamond")
    spec = TransducerSpec(
        shape=shape,
        length=_take_float(pairs, "transducer.length_mm", source, 8.0),
        height=_take_float(pairs, "transducer.height_mm", source, 4.0),
        truncation=_take_float(pairs, "transducer.truncation", source, 0.75))

    def rng(key, default):
        if key in pairs:
            return _parse_range(pairs.pop(key), source, key)
        return default

    cfg = RunConfig(
        material=material, geometry=geometry, transducer=spec,
        wavelength_red_nm=_take_float(pairs, "wavelengths.red_nm", source,
                                      780.0),
        wavelength_blue_nm=_take_float(pairs, "wavelengths.blue_nm", source,
                                       480.0),
        ripple_red_db=_take_float(pairs, "ripple.red_db", source, 0.5),
        ripple_blue_db=_take_float(pairs, "ripple.blue_db", source, 1.0),
        hf_limit_mhz=_take_float(pairs, "limits.hf_mhz", source, 230.0),
        fom_phi_o=rng("fom.phi_o_deg", RunConfig.fom_phi_o),
        fom_phi_a=rng("fom.phi_a_deg", RunConfig.fom_phi_a),
        sweep_theta=rng("sweep.theta_deg", RunConfig.sweep_theta),
        sweep_phi=rng("sweep.phi_deg", RunConfig.sweep_phi),
        beam_diameter_mm=_take_float(pairs, "cascade.beam_diameter_mm",
                                     source, 3.0),
        fourier_focal_mm=_take_float(pairs, "cascade.fourier_focal_mm",
                                     source, 42.0),
        collimator_focal_mm=_take_float(pairs, "cascade.collimator_focal_mm",
                                        source, 400.0),
        objective_focal_mm=_take_float(pairs, "cascade.objective_focal_mm",
                                       source, 110.0),
        trap_pitch_um=_take_float(pairs, "cascade.trap_pitch_um", source, 8.0),
        switch_beam_mm=_take_float(pairs, "cascade.switch_beam_mm", source,
                                   1.2))
    if "cascade.bandwidth_mhz" in pairs:
        cfg.cascade_bandwidth_mhz = _take_float(pairs,
                                                "cascade.bandwidth_mhz", source)
    _fail_unknown(pairs, source)
    return cfg


def load_run_config(path: str | Path) -> RunConfig:
    path = Path(path)
    return run_config_from_pairs(
        parse_kv_text(path.read_text(encoding="utf-8"), str(path)), str(path))


def default_run_config() -> RunConfig:
    return run_config_from_pairs({})
