"""JSON configuration ingestion, canonicalization, and digesting.

Physics parameters carry no implicit defaults (a missing field is a hard
error naming it); only numerical knobs default.  The canonical form is a
fully resolved nested dict whose JSON serialization is byte-stable, and the
config digest is the sha256 of that serialization.
"""

import hashlib
import json
from dataclasses import dataclass
from typing import Sequence

from .channel import SystemConfig
from .errors import ConfigError
from .optimizer import Scheme

_SCHEME_NAMES = {
    "dpc-tin": Scheme.DPC_TIN,
    "dpc-sic": Scheme.DPC_SIC,
    "power-sharing": Scheme.POWER_SHARING_TIN,
    "power-sharing-tin": Scheme.POWER_SHARING_TIN,
    "power-sharing-sic": Scheme.POWER_SHARING_SIC,
    "time-sharing": Scheme.TIME_SHARING,
}

_REQUIRED = ("power", "block_len", "num_blocks", "num_streams", "false_alarm",
             "embb_target", "urllc_msgs", "dpc_bins", "sense_codebook")
_KNOB_DEFAULTS = {
    "k_u": 1.0,
    "k_e": 1.0,
    "berry_esseen_b": 0.0,
    "berry_esseen_btilde": 0.0,
    "sic_variance_variant": "as_written",
    "detection_nu_variant": "exact",
}
_SWEEP_DEFAULTS = {"grid_points": 21, "joint_search": False}


@dataclass(frozen=True)
class SweepSettings:
    schemes: tuple
    urllc_targets: tuple
    detection_targets: tuple
    grid_points: int
    joint_search: bool


def scheme_from_name(name: str) -> Scheme:
    try:
        return _SCHEME_NAMES[name]
    except KeyError:
        raise ConfigError(f"unknown scheme {name!r}; expected one of "
                          f"{sorted(set(_SCHEME_NAMES))}", field="schemes")


def _require(doc, key):
    if key not in doc:
        raise ConfigError(f"missing required field {key!r}", field=key)
    return doc[key]


def canonicalize(doc: dict) -> dict:
    """Resolve defaults and normalize shapes; raises ConfigError on problems."""
    if not isinstance(doc, dict):
        raise ConfigError("configuration root must be a JSON object")
    out = {}
    for key in _REQUIRED:
        out[key] = _require(doc, key)

    if "comm_eigenvalues" in doc:
        out["comm_eigenvalues"] = [[float(v) for v in row]
                                   for row in doc["comm_eigenvalues"]]
    elif "comm_gain" in doc:
        out["comm_gain"] = float(doc["comm_gain"])
    else:
        raise ConfigError("provide comm_gain (shared) or comm_eigenvalues "
                          "(per block/stream)", field="comm_gain")
    if "sense_eigenvalues" in doc:
        out["sense_eigenvalues"] = [[float(v) for v in row]
                                    for row in doc["sense_eigenvalues"]]
    elif "sense_gain" in doc:
        out["sense_gain"] = float(doc["sense_gain"])
    else:
        raise ConfigError("provide sense_gain (shared) or sense_eigenvalues "
                          "(per block/stream)", field="sense_gain")

    for key, default in _KNOB_DEFAULTS.items():
        out[key] = doc.get(key, default)

    sweep_doc = _require(doc, "sweep")
    if not isinstance(sweep_doc, dict):
        raise ConfigError("sweep must be an object", field="sweep")
    sweep = {}
    for key in ("schemes", "urllc_targets", "detection_targets"):
        val = _require(sweep_doc, key)
        if not isinstance(val, Sequence) or not len(val):
            raise ConfigError(f"sweep.{key} must be a nonempty list", field=key)
        sweep[key] = list(val)
    for name in sweep["schemes"]:
        scheme_from_name(name)
    for key, default in _SWEEP_DEFAULTS.items():
        sweep[key] = sweep_doc.get(key, default)
    out["sweep"] = sweep

    known = set(_REQUIRED) | set(_KNOB_DEFAULTS) | {
        "comm_gain", "comm_eigenvalues", "sense_gain", "sense_eigenvalues",
        "sweep"}
    for key in doc:
        if key not in known:
            raise ConfigError(f"unknown field {key!r}", field=key)
    known_sweep = {"schemes", "urllc_targets", "detection_targets",
                   "grid_points", "joint_search"}
    for key in sweep_doc:
        if key not in known_sweep:
            raise ConfigError(f"unknown field sweep.{key!r}", field=key)
    return out


def serialize(canonical: dict) -> str:
    return json.dumps(canonical, sort_keys=True, separators=(",", ":"))


def digest(canonical: dict) -> str:
    return hashlib.sha256(serialize(canonical).encode()).hexdigest()


def build(canonical: dict):
    """(SystemConfig, SweepSettings) from a canonical document."""
    sweep = canonical["sweep"]
    settings = SweepSettings(
        schemes=tuple(scheme_from_name(s) for s in sweep["schemes"]),
        urllc_targets=tuple(float(v) for v in sweep["urllc_targets"]),
        detection_targets=tuple(float(v) for v in sweep["detection_targets"]),
        grid_points=int(sweep["grid_points"]),
        joint_search=bool(sweep["joint_search"]),
    )
    common = dict(
        power=float(canonical["power"]),
        block_len=int(canonical["block_len"]),
        num_blocks=int(canonical["num_blocks"]),
        num_streams=int(canonical["num_streams"]),
        false_alarm=float(canonical["false_alarm"]),
        embb_target=float(canonical["embb_target"]),
        urllc_target=settings.urllc_targets[0],
        detection_target=settings.detection_targets[0],
        urllc_msgs=int(canonical["urllc_msgs"]),
        dpc_bins=int(canonical["dpc_bins"]),
        sense_codebook=int(canonical["sense_codebook"]),
        k_u=float(canonical["k_u"]),
        k_e=float(canonical["k_e"]),
        berry_esseen_b=float(canonical["berry_esseen_b"]),
        berry_esseen_btilde=float(canonical["berry_esseen_btilde"]),
        sic_variance_variant=canonical["sic_variance_variant"],
        detection_nu_variant=canonical["detection_nu_variant"],
    )
    if "comm_gain" in canonical:
        cfg = SystemConfig.homogeneous(comm_gain=canonical["comm_gain"],
                                       sense_gain=canonical["sense_gain"],
                                       **common)
    else:
        cfg = SystemConfig(comm_eigenvalues=canonical["comm_eigenvalues"],
                           sense_eigenvalues=canonical["sense_eigenvalues"],
                           **common)
    return cfg, settings


def load(path: str):
    """Parse, canonicalize, and build; returns (cfg, settings, canonical)."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as err:
        raise ConfigError(f"cannot read config: {err}")
    except json.JSONDecodeError as err:
        raise ConfigError(f"config is not valid JSON: line {err.lineno}, "
                          f"column {err.colno}: {err.msg}")
    canonical = canonicalize(doc)
    cfg, settings = build(canonical)
    return cfg, settings, canonical
