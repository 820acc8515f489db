"""Problem files: JSON descriptions of a 1-form (or a Hamiltonian) to analyze."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .symexpr import ParseError, SymbolTable, SymbolTableError

BUNDLED = "affinelag.problems"


class ProblemError(ValueError):
    """The problem file is unreadable or does not describe a valid system."""


@dataclass(frozen=True)
class Parameter:
    name: str
    assumption: str = "real"
    value: float | None = None


@dataclass(frozen=True)
class ProblemSpec:
    name: str
    coordinates: tuple[str, ...]
    time: str = "t"
    autonomous: bool = False
    parameters: tuple[Parameter, ...] = ()
    domain: tuple[str, ...] = ()
    m: tuple[str, ...] | None = None
    V: str | None = None
    H: str | None = None
    pairs: int | None = None
    source: str | None = field(default=None, compare=False)

    @property
    def mode(self) -> str:
        return "hamiltonian" if self.H is not None else "one_form"

    def table(self) -> SymbolTable:
        assumptions = {p.name: p.assumption for p in self.parameters}
        return SymbolTable.build(
            self.coordinates,
            [p.name for p in self.parameters],
            time=self.time,
            assumptions=assumptions,
            domain=self.domain,
        )

    def parameter_values(self) -> dict[str, float]:
        return {p.name: p.value for p in self.parameters if p.value is not None}

    def to_json(self) -> dict:
        out: dict = {
            "name": self.name,
            "autonomous": self.autonomous,
            "time": self.time,
            "coordinates": list(self.coordinates),
            "parameters": [
                {k: v for k, v in (("name", p.name), ("assumption", p.assumption), ("value", p.value)) if v is not None}
                for p in self.parameters
            ],
            "domain": list(self.domain),
        }
        if self.mode == "hamiltonian":
            out["hamiltonian"] = {"H": self.H, "pairs": self.pairs}
        else:
            out["one_form"] = {"m": list(self.m), "V": self.V}
        return out


def _require(cond: bool, msg: str):
    if not cond:
        raise ProblemError(msg)


def problem_from_dict(data: dict, source: str | None = None) -> ProblemSpec:
    _require(isinstance(data, dict), "problem file must contain a JSON object")
    name = data.get("name", source or "problem")
    coords = data.get("coordinates")
    _require(
        isinstance(coords, list) and coords and all(isinstance(c, str) for c in coords),
        "'coordinates' must be a non-empty list of names",
    )
    params = []
    for p in data.get("parameters", []):
        if isinstance(p, str):
            p = {"name": p}
        _require(isinstance(p, dict) and isinstance(p.get("name"), str), f"bad parameter entry {p!r}")
        value = p.get("value")
        _require(value is None or isinstance(value, (int, float)), f"parameter value must be a number: {p!r}")
        params.append(Parameter(p["name"], p.get("assumption", "real"), None if value is None else float(value)))
    domain = data.get("domain", [])
    _require(isinstance(domain, list) and all(isinstance(d, str) for d in domain), "'domain' must be a list of strings")
    has_form = "one_form" in data
    has_ham = "hamiltonian" in data
    _require(has_form != has_ham, "exactly one of 'one_form' and 'hamiltonian' must be present")
    kw: dict = {}
    if has_form:
        form = data["one_form"]
        _require(isinstance(form, dict), "'one_form' must be an object")
        m = form.get("m")
        _require(isinstance(m, list) and all(isinstance(x, str) for x in m), "'one_form.m' must be a list of strings")
        _require(
            len(m) == len(coords),
            f"'one_form.m' has {len(m)} entries but there are {len(coords)} coordinates",
        )
        V = form.get("V", "0")
        _require(isinstance(V, str), "'one_form.V' must be a string")
        kw.update(m=tuple(m), V=V)
    else:
        ham = data["hamiltonian"]
        _require(isinstance(ham, dict) and isinstance(ham.get("H"), str), "'hamiltonian.H' must be a string")
        pairs = ham.get("pairs", len(coords) // 2)
        _require(
            isinstance(pairs, int) and pairs > 0 and 2 * pairs == len(coords),
            "'hamiltonian.pairs' must be half the number of coordinates",
        )
        kw.update(H=ham["H"], pairs=pairs)
    spec = ProblemSpec(
        name=str(name),
        coordinates=tuple(coords),
        time=data.get("time", "t"),
        autonomous=bool(data.get("autonomous", False)),
        parameters=tuple(params),
        domain=tuple(domain),
        source=source,
        **kw,
    )
    # surface naming and grammar problems at load time
    try:
        table = spec.table()
        table.inequalities()
        for text in (spec.m or ()) + tuple(x for x in (spec.V, spec.H) if x is not None):
            table.parse(text)
    except (SymbolTableError, ParseError) as exc:
        raise ProblemError(str(exc)) from None
    return spec


def bundled_problems() -> list[str]:
    return sorted(
        p.name[: -len(".json")] for p in resources.files(BUNDLED).iterdir() if p.name.endswith(".json")
    )


def load_problem(path: str | Path) -> ProblemSpec:
    """Load a problem file; a bare name such as ``lotka_volterra`` finds a bundled one."""
    p = Path(path)
    if p.exists():
        text, source = _read(p), str(p)
    else:
        stem = p.name[: -len(".json")] if p.name.endswith(".json") else p.name
        bundled = resources.files(BUNDLED) / f"{stem}.json"
        if not bundled.is_file():
            raise ProblemError(f"no such problem file: {path}")
        text, source = bundled.read_text(), stem
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemError(f"invalid JSON in {source}: {exc}") from None
    return problem_from_dict(data, source)


def _read(p: Path) -> str:
    try:
        return p.read_text()
    except OSError as exc:
        raise ProblemError(f"cannot read {p}: {exc}") from None
