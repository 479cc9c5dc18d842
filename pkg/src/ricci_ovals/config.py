"""Experiment configuration: JSON in, validated dataclass out.

Unknown keys are rejected by name; defaults are filled so an emitted
effective config parses back to itself byte-for-byte.
"""

import json
from dataclasses import asdict, dataclass, field

from .errors import ParseError, SchemaError

_SCHEMA: dict[str, tuple] = {
    # name: (type, default)
    "kind": (str, "cylinder"),
    "N": (int, 256),
    "tau_init": (float, -20.0),
    "tau_end": (float, -10.0),
    "t_init": (float, -1.0),
    "t_end": (float, -0.0625),
    "cfl": (float, 0.2),
    "theta": (float, 0.1),
    "L": (float, 20.0),
    "tau0": (float, -400.0),
    "cadence": (float, 0.5),
    "domain": (float, 24.0),
    "u_floor": (float, 0.5),
    "perturb_eps": (float, 0.0),
    "perturb_mode": (int, 0),
    "stop_radius": (float, None),
    "seed": (int, 20109),
    "threads": (int, 1),
    "out_dir": (str, "."),
    "tolerances": (dict, None),
}

_KINDS = {"cylinder", "sphere", "oval", "custom"}


@dataclass(frozen=True)
class ExperimentConfig:
    kind: str = "cylinder"
    N: int = 256
    tau_init: float = -20.0
    tau_end: float = -10.0
    t_init: float = -1.0
    t_end: float = -0.0625
    cfl: float = 0.2
    theta: float = 0.1
    L: float = 20.0
    tau0: float = -400.0
    cadence: float = 0.5
    domain: float = 24.0
    u_floor: float = 0.5
    perturb_eps: float = 0.0
    perturb_mode: int = 0
    stop_radius: float | None = None
    seed: int = 20109
    threads: int = 1
    out_dir: str = "."
    tolerances: dict | None = field(default=None)

    def effective_dict(self) -> dict:
        d = asdict(self)
        return {k: d[k] for k in _SCHEMA}

    def emit(self, path):
        with open(path, "w") as fh:
            json.dump(self.effective_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def solver_config(self):
        from .solver import SolverConfig

        return SolverConfig(
            kind=self.kind,
            n=self.N,
            tau_init=self.tau_init,
            tau_end=self.tau_end,
            t_init=self.t_init,
            t_end=self.t_end,
            cfl=self.cfl,
            theta=self.theta,
            cadence=self.cadence,
            domain=self.domain,
            u_floor=self.u_floor,
            perturb_eps=self.perturb_eps,
            perturb_mode=self.perturb_mode,
            stop_radius=self.stop_radius,
        )


def validate(raw: dict) -> ExperimentConfig:
    for key in raw:
        if key not in _SCHEMA:
            raise SchemaError(key)
    values = {}
    for key, (typ, default) in _SCHEMA.items():
        if key not in raw or raw[key] is None:
            values[key] = default
            continue
        v = raw[key]
        if typ is float:
            if not isinstance(v, (int, float)) or isinstance(v, bool):
                raise SchemaError(f"{key}: expected a number, got {type(v).__name__}")
            v = float(v)
        elif typ is int:
            if not isinstance(v, int) or isinstance(v, bool):
                raise SchemaError(f"{key}: expected an integer, got {type(v).__name__}")
        elif not isinstance(v, typ):
            raise SchemaError(f"{key}: expected {typ.__name__}, got {type(v).__name__}")
        values[key] = v
    if values["kind"] not in _KINDS:
        raise SchemaError(f"kind: must be one of {sorted(_KINDS)}")
    if values["N"] < 64:
        raise SchemaError("N: must be >= 64")
    if not (0.0 < values["cfl"] <= 0.5):
        raise SchemaError("cfl: must lie in (0, 0.5]")
    return ExperimentConfig(**values)


def parse_config(path) -> ExperimentConfig:
    """Load, validate, and default-fill a JSON config file."""
    with open(path) as fh:
        text = fh.read()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise SchemaError("top level must be a JSON object")
    return validate(raw)
