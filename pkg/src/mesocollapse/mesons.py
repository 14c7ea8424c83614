"""Measured neutral-meson observables and the decay widths derived from them."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Callable, Union

from .quantities import Quantity, propagate
from .units import MEV_IN_INV_S

SCHEMA_VERSION = 1
DATASET_ENV = "MESOCOLLAPSE_DATASET"


class Species(str, Enum):
    K = "K"
    D = "D"
    BD = "Bd"
    BS = "Bs"

    @classmethod
    def parse(cls, name: str) -> "Species":
        for s in cls:
            if s.value.lower() == name.lower():
                return s
        raise ValueError(f"unknown species {name!r}; expected one of {[s.value for s in cls]}")


SPECIES_ORDER = (Species.K, Species.D, Species.BD, Species.BS)


@dataclass(frozen=True)
class WidthRatio:
    """Relative width difference y = dGamma/Gamma and the mean lifetime 1/Gamma."""

    dgamma_over_gamma: Quantity
    mean_lifetime: Quantity
    kind = "width_ratio"


@dataclass(frozen=True)
class Lifetimes:
    tau_L: Quantity
    tau_H: Quantity
    kind = "lifetimes"


Inputs = Union[WidthRatio, Lifetimes]


def widths_from_ratio(r: Quantity, tau: Quantity) -> tuple[Quantity, Quantity]:
    """Gamma_{L,H} = (1 +- r/2) / tau, propagated from (r, tau)."""
    if tau.value <= 0:
        raise ValueError("mean lifetime must be positive")
    gl = propagate(lambda r_, t_: (1 + r_ / 2) / t_, [r, tau], "s^-1")
    gh = propagate(lambda r_, t_: (1 - r_ / 2) / t_, [r, tau], "s^-1")
    return gl, gh


def widths_from_lifetimes(tau_L: Quantity, tau_H: Quantity) -> tuple[Quantity, Quantity]:
    if tau_L.value <= 0 or tau_H.value <= 0:
        raise ValueError("lifetimes must be positive")
    return (
        propagate(lambda t: 1 / t, [tau_L], "s^-1"),
        propagate(lambda t: 1 / t, [tau_H], "s^-1"),
    )


@dataclass(frozen=True)
class RawObservables:
    species: Species
    inputs: Inputs
    delta_m: Quantity
    rest_mass_mev: Quantity
    source: str = ""

    def __post_init__(self):
        if self.delta_m.value <= 0:
            raise ValueError("delta_m must be positive")
        if self.rest_mass_mev.value <= 0:
            raise ValueError("rest mass must be positive")
        if isinstance(self.inputs, WidthRatio):
            if self.inputs.mean_lifetime.value <= 0:
                raise ValueError("mean lifetime must be positive")
            if not -2 < self.inputs.dgamma_over_gamma.value < 2:
                raise ValueError("dGamma/Gamma must lie in (-2, 2)")
        elif isinstance(self.inputs, Lifetimes):
            if self.inputs.tau_L.value <= 0 or self.inputs.tau_H.value <= 0:
                raise ValueError("lifetimes must be positive")
        else:
            raise TypeError(f"unsupported input kind {type(self.inputs).__name__}")

    def raw_quantities(self) -> list[Quantity]:
        if isinstance(self.inputs, WidthRatio):
            return [self.inputs.dgamma_over_gamma, self.inputs.mean_lifetime, self.delta_m]
        return [self.inputs.tau_L, self.inputs.tau_H, self.delta_m]

    def rates_function(self) -> Callable:
        """Map the raw quantities onto (Gamma_L, Gamma_H, delta_m)."""
        if isinstance(self.inputs, WidthRatio):
            return lambda r, tau, dm: ((1 + r / 2) / tau, (1 - r / 2) / tau, dm)
        return lambda tl, th, dm: (1 / tl, 1 / th, dm)


@dataclass(frozen=True)
class MesonParams:
    """Decay widths, mass difference and rest mass of one species (all in s^-1).

    When ``raw`` is present, derived quantities are propagated from the raw
    measurements so that correlations between Gamma_L and Gamma_H (both
    depend on the same lifetime in the width-ratio case) are kept.
    """

    species: Species
    gamma_L: Quantity
    gamma_H: Quantity
    delta_m: Quantity
    rest_mass: Quantity
    raw: RawObservables | None = None

    def __post_init__(self):
        if self.gamma_L.value < 0 or self.gamma_H.value < 0:
            raise ValueError("decay widths must be non-negative")
        if self.delta_m.value < 0:
            raise ValueError("delta_m must be non-negative")

    @classmethod
    def from_raw(cls, raw: RawObservables) -> "MesonParams":
        if isinstance(raw.inputs, WidthRatio):
            gl, gh = widths_from_ratio(raw.inputs.dgamma_over_gamma, raw.inputs.mean_lifetime)
        else:
            gl, gh = widths_from_lifetimes(raw.inputs.tau_L, raw.inputs.tau_H)
        return cls(
            species=raw.species,
            gamma_L=gl,
            gamma_H=gh,
            delta_m=raw.delta_m,
            rest_mass=raw.rest_mass_mev.scaled(MEV_IN_INV_S, "s^-1"),
            raw=raw,
        )

    @classmethod
    def exact(cls, species, gamma_L, gamma_H, delta_m, rest_mass_mev=1.0) -> "MesonParams":
        """Build from plain numbers, without uncertainties."""
        return cls(
            Species.parse(species) if isinstance(species, str) else species,
            Quantity(float(gamma_L), unit="s^-1"),
            Quantity(float(gamma_H), unit="s^-1"),
            Quantity(float(delta_m), unit="s^-1"),
            Quantity(float(rest_mass_mev) * MEV_IN_INV_S, unit="s^-1"),
        )

    @property
    def gamma_avg(self) -> float:
        return 0.5 * (self.gamma_L.value + self.gamma_H.value)

    def propagate(self, func: Callable, unit: str = "") -> Quantity:
        """Propagate ``func(gamma_L, gamma_H, delta_m)`` from the raw inputs."""
        if self.raw is None:
            return propagate(func, [self.gamma_L, self.gamma_H, self.delta_m], unit)
        rates = self.raw.rates_function()
        return propagate(lambda *x: func(*rates(*x)), self.raw.raw_quantities(), unit)


def width_asymmetry(params: MesonParams) -> Quantity:
    """R = (Gamma_L - Gamma_H) / (Gamma_L + Gamma_H)."""
    return params.propagate(lambda gl, gh, dm: (gl - gh) / (gl + gh))


# --- dataset I/O ---------------------------------------------------------


def _q(d: dict, unit: str = "") -> Quantity:
    q = Quantity.from_dict(d)
    return Quantity(q.value, q.err_plus, q.err_minus, unit or q.unit)


def _qdict(q: Quantity) -> dict:
    d = {"value": q.value, "err_plus": q.err_plus}
    if not q.symmetric:
        d["err_minus"] = q.err_minus
    return d


def raw_from_dict(name: str, entry: dict) -> RawObservables:
    inp = entry["inputs"]
    kind = inp.get("kind")
    if kind == "width_ratio":
        inputs = WidthRatio(_q(inp["dgamma_over_gamma"]), _q(inp["mean_lifetime"], "s"))
    elif kind == "lifetimes":
        inputs = Lifetimes(_q(inp["tau_L"], "s"), _q(inp["tau_H"], "s"))
    else:
        raise ValueError(f"{name}: unknown input kind {kind!r}")
    return RawObservables(
        species=Species.parse(name),
        inputs=inputs,
        delta_m=_q(entry["delta_m"], "s^-1"),
        rest_mass_mev=_q(entry["rest_mass"], "MeV"),
        source=entry.get("source", ""),
    )


def raw_to_dict(raw: RawObservables) -> dict:
    if isinstance(raw.inputs, WidthRatio):
        inputs = {
            "kind": "width_ratio",
            "dgamma_over_gamma": _qdict(raw.inputs.dgamma_over_gamma),
            "mean_lifetime": _qdict(raw.inputs.mean_lifetime),
        }
    else:
        inputs = {"kind": "lifetimes", "tau_L": _qdict(raw.inputs.tau_L), "tau_H": _qdict(raw.inputs.tau_H)}
    return {
        "inputs": inputs,
        "delta_m": _qdict(raw.delta_m),
        "rest_mass": _qdict(raw.rest_mass_mev),
        "source": raw.source,
    }


@dataclass(frozen=True)
class Dataset:
    version: str
    path: str
    raw: dict

    def params(self, species) -> MesonParams:
        s = Species.parse(species) if isinstance(species, str) else species
        return MesonParams.from_raw(self.raw[s])

    def all_params(self) -> list[MesonParams]:
        return [self.params(s) for s in SPECIES_ORDER if s in self.raw]


def default_dataset_path() -> str:
    override = os.environ.get(DATASET_ENV)
    if override:
        return override
    return str(resources.files("mesocollapse") / "data" / "mesons_v1.json")


def load_dataset(path: str | os.PathLike | None = None) -> Dataset:
    path = str(path) if path is not None else default_dataset_path()
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    version = doc.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ValueError(f"{path}: unsupported schema_version {version!r}")
    raw = {Species.parse(k): raw_from_dict(k, v) for k, v in doc["species"].items()}
    return Dataset(doc.get("dataset_version", "unversioned"), path, raw)


def dump_dataset(params: list[MesonParams], path: str | os.PathLike, dataset_version: str = "derived") -> None:
    """Write parameters in the loader's format; derived widths ride along for reference."""
    species = {}
    for p in params:
        if p.raw is None:
            raise ValueError(f"{p.species.value}: cannot serialise parameters without raw inputs")
        entry = raw_to_dict(p.raw)
        entry["derived"] = {"gamma_L": p.gamma_L.to_dict(), "gamma_H": p.gamma_H.to_dict()}
        species[p.species.value] = entry
    doc = {"schema_version": SCHEMA_VERSION, "dataset_version": dataset_version, "species": species}
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
