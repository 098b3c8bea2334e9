"""Reads vmmma.config.json into validated model, grid and run settings"""
from __future__ import annotations

# Built-in
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, TypeVar

# Third-Party
import numpy as np

# This project
from vmmmapy.errors import ConfigError
from vmmmapy.fourier.design import CovarianceTable
from vmmmapy.kernels.families import KERNEL_FAMILIES, Tabulated
from vmmmapy.kernels.grid import GridSpec
from vmmmapy.kernels.kernel import DEFAULT_TOLERANCE, Kernel
from vmmmapy.levy.basis import LEVY_FAMILIES, CharQuadruplet
from vmmmapy.levy.mixing import MixingMeasure
from vmmmapy.simulate.model import ConstantVolatility, VmmmaModel, VolatilityModel

__all__: tuple[str, ...] = (
    "DEFAULT_CONFIG",
    "GridConfig",
    "RunConfig",
    "DesignConfig",
    "ExperimentConfig",
    "load_config",
    "parse_config",
)

DEFAULT_CONFIG = "vmmma.config.json"

T = TypeVar("T")


def _block(data: Any, path: str, required: tuple[str, ...] = (), optional: tuple[str, ...] = ()) -> dict[str, Any]:
    """Check that a block is an object with exactly the allowed keys"""
    if not isinstance(data, dict):
        raise ConfigError("expected an object", path)
    for key in data:
        if key not in required and key not in optional:
            raise ConfigError(f"unknown key {key!r}", path)
    for key in required:
        if key not in data:
            raise ConfigError(f"missing key {key!r}", path)
    return data


def _join(path: str, key: str) -> str:
    return f"{path}.{key}" if path else key


def _build(path: str, factory: Callable[..., T], *args: Any, **kwargs: Any) -> T:
    """Call a constructor, turning its precondition errors into a ConfigError at path"""
    try:
        return factory(*args, **kwargs)
    except ConfigError:
        raise
    except (ValueError, TypeError, KeyError) as error:
        raise ConfigError(str(error), path) from error


def _numbers(value: Any, path: str) -> tuple[float, ...]:
    items = value if isinstance(value, list) else [value]
    if not items or any(isinstance(item, bool) or not isinstance(item, (int, float)) for item in items):
        raise ConfigError("expected a number or a list of numbers", path)
    return tuple(float(item) for item in items)


def _integer(value: Any, path: str, minimum: int) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ConfigError(f"expected an integer >= {minimum}", path)
    return value


def _points(value: Any, path: str) -> tuple[tuple[float, ...], ...]:
    if not isinstance(value, list):
        raise ConfigError("expected a list", path)
    return tuple(_numbers(item, f"{path}[{index}]") for index, item in enumerate(value))


def parse_mixing(data: Any, path: str) -> MixingMeasure:
    """A mixing block: dirac, discrete, quadrature or distribution"""
    kind = _block(data, path, ("kind",), ("atom", "atoms", "nodes", "name", "params")).get("kind")
    if kind == "dirac":
        _block(data, path, ("kind",), ("atom",))
        atom = data.get("atom", [])
        return _build(path, MixingMeasure.dirac, () if atom == [] else _numbers(atom, _join(path, "atom")))
    if kind in ("discrete", "quadrature"):
        key = "atoms" if kind == "discrete" else "nodes"
        _block(data, path, ("kind", key))
        if not isinstance(data[key], list):
            raise ConfigError("expected a list", _join(path, key))
        atoms = []
        for index, atom in enumerate(data[key]):
            atom_path = f"{_join(path, key)}[{index}]"
            _block(atom, atom_path, ("x", "weight"))
            atoms.append((_numbers(atom["x"], _join(atom_path, "x")), _numbers(atom["weight"], _join(atom_path, "weight"))[0]))
        factory = MixingMeasure.discrete if kind == "discrete" else MixingMeasure.quadrature
        return _build(path, factory, atoms)
    if kind == "distribution":
        _block(data, path, ("kind", "name", "nodes"), ("params",))
        params = data.get("params", {})
        if not isinstance(params, dict):
            raise ConfigError("expected an object", _join(path, "params"))
        return _build(
            path, MixingMeasure.from_distribution, str(data["name"]),
            {key: _numbers(value, _join(path, f"params.{key}"))[0] for key, value in params.items()},
            _integer(data["nodes"], _join(path, "nodes"), 1),
        )
    raise ConfigError(f"unknown mixing kind {kind!r}", _join(path, "kind"))


def parse_kernel(data: Any, path: str, root: Path) -> Kernel:
    """
    A kernel block: family, params, and optionally mixing and mixed_parameters, or path for a tabulated kernel.

    ### Arguments
    - data (Any): The block
    - path (str): Its location in the config, for error messages
    - root (Path): Directory relative paths are resolved against

    ### Returns
    - Kernel: The mixed kernel
    """
    _block(data, path, ("family",), ("params", "mixing", "mixed_parameters", "path"))
    name = data["family"]
    if name not in KERNEL_FAMILIES:
        raise ConfigError(f"unknown kernel family {name!r}, expected one of {sorted(KERNEL_FAMILIES)}", _join(path, "family"))
    if name == Tabulated.name:
        if "path" not in data:
            raise ConfigError("a tabulated kernel needs a path", path)
        family = _build(_join(path, "path"), Tabulated.from_csv, root / data["path"])
    else:
        params = data.get("params", {})
        if not isinstance(params, dict):
            raise ConfigError("expected an object", _join(path, "params"))
        values = {key: value if not isinstance(value, list) else tuple(value) for key, value in params.items()}
        family = _build(_join(path, "params"), KERNEL_FAMILIES[name], **values)
    mixing = parse_mixing(data["mixing"], _join(path, "mixing")) if "mixing" in data else MixingMeasure.dirac()
    mixed = data.get("mixed_parameters", [])
    if not isinstance(mixed, list) or not all(isinstance(item, str) for item in mixed):
        raise ConfigError("expected a list of parameter names", _join(path, "mixed_parameters"))
    return _build(path, Kernel, family, mixing, tuple(mixed))


def parse_basis(data: Any, path: str, control: MixingMeasure | None = None) -> CharQuadruplet:
    """A basis block: gaussian, gamma, inverse_gaussian or compound_poisson with params and an optional drift"""
    _block(data, path, ("family",), ("params", "drift"))
    name, params = data["family"], data.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError("expected an object", _join(path, "params"))
    drift = data.get("drift")
    if drift is not None:
        drift = _numbers(drift, _join(path, "drift"))[0]
    if name == "gaussian":
        _block(params, _join(path, "params"), ("variance",))
        variance = _numbers(params["variance"], _join(path, "params.variance"))[0]
        return _build(path, CharQuadruplet, drift or 0.0, variance, None, control or MixingMeasure.dirac())
    if name not in LEVY_FAMILIES:
        raise ConfigError(f"unknown basis family {name!r}", _join(path, "family"))
    family = _build(_join(path, "params"), LEVY_FAMILIES[name], **params)
    return _build(path, CharQuadruplet, drift, 0.0, family, control or MixingMeasure.dirac())


def parse_volatility(data: Any, path: str, root: Path) -> VolatilityModel | ConstantVolatility:
    kind = _block(data, path, ("kind",), ("value", "kernel_h", "basis"))["kind"]
    if kind == "constant":
        _block(data, path, ("kind", "value"))
        return _build(path, ConstantVolatility, _numbers(data["value"], _join(path, "value"))[0])
    if kind == "levy":
        _block(data, path, ("kind", "kernel_h", "basis"))
        kernel_h = parse_kernel(data["kernel_h"], _join(path, "kernel_h"), root)
        basis = parse_basis(data["basis"], _join(path, "basis"), kernel_h.mixing)
        return _build(path, VolatilityModel, kernel_h, basis)
    raise ConfigError(f"unknown volatility kind {kind!r}", _join(path, "kind"))


@dataclass(frozen=True)
class GridConfig:
    grid: GridSpec
    tolerance: float = DEFAULT_TOLERANCE
    max_radius: float | None = None


def parse_grid(data: Any, path: str = "grid") -> GridConfig:
    _block(data, path, ("origin", "step", "count"), ("tolerance", "max_radius"))
    origin = _numbers(data["origin"], _join(path, "origin"))
    step = _numbers(data["step"], _join(path, "step"))
    counts = data["count"] if isinstance(data["count"], list) else [data["count"]]
    count = tuple(_integer(value, _join(path, "count"), 1) for value in counts)
    grid = _build(path, GridSpec, origin, step, count)
    tolerance = _numbers(data.get("tolerance", DEFAULT_TOLERANCE), _join(path, "tolerance"))[0]
    max_radius = data.get("max_radius")
    if max_radius is not None:
        max_radius = _numbers(max_radius, _join(path, "max_radius"))[0]
    return GridConfig(grid, tolerance, max_radius)


@dataclass(frozen=True)
class RunConfig:
    """The run block: replication counts, seeds and every evaluation grid"""

    n_reps: int = 100
    master_seed: int = 0
    theta_grid: tuple[float, ...] = (0.0, 0.5, 1.0, 2.0)
    lags: tuple[tuple[float, ...], ...] = ()
    laplace_theta: tuple[float, ...] = (0.5, 1.0)
    points: tuple[tuple[float, ...], ...] = ()
    joint_thetas: tuple[tuple[float, ...], ...] = ()
    hurst: tuple[float, ...] = ()
    workers: int = 1
    save_fields: bool = False


RUN_KEYS = tuple(RunConfig.__dataclass_fields__)


def parse_run(data: Any, path: str = "run") -> RunConfig:
    _block(data, path, optional=RUN_KEYS)
    values: dict[str, Any] = {}
    if "n_reps" in data:
        values["n_reps"] = _integer(data["n_reps"], _join(path, "n_reps"), 2)
    if "master_seed" in data:
        values["master_seed"] = _integer(data["master_seed"], _join(path, "master_seed"), 0)
    if "workers" in data:
        values["workers"] = _integer(data["workers"], _join(path, "workers"), 1)
    for key in ("theta_grid", "laplace_theta", "hurst"):
        if key in data:
            values[key] = _numbers(data[key], _join(path, key))
    for key in ("lags", "points", "joint_thetas"):
        if key in data:
            values[key] = _points(data[key], _join(path, key))
    if "save_fields" in data:
        if not isinstance(data["save_fields"], bool):
            raise ConfigError("expected true or false", _join(path, "save_fields"))
        values["save_fields"] = data["save_fields"]
    if any(value < 0 for value in values.get("laplace_theta", ())):
        raise ConfigError("Laplace arguments must be nonnegative", _join(path, "laplace_theta"))
    for index, thetas in enumerate(values.get("joint_thetas", ())):
        if len(thetas) != len(values.get("points", ())):
            raise ConfigError("every theta vector needs one entry per point", f"{_join(path, 'joint_thetas')}[{index}]")
    return RunConfig(**values)


@dataclass(frozen=True)
class DesignConfig:
    """The design block: target covariance and the lag lattice it is tabulated on"""

    covariance: CovarianceTable
    root: str = "even"


def parse_design(data: Any, root: Path, path: str = "design") -> DesignConfig:
    _block(data, path, ("covariance",), ("lag_step", "lag_count", "root"))
    covariance_path = _join(path, "covariance")
    target = _block(data["covariance"], covariance_path, ("kind",), ("scale", "variance", "path"))
    kind = target["kind"]
    variance = _numbers(target.get("variance", 1.0), _join(covariance_path, "variance"))[0]
    if kind in ("gaussian", "exponential"):
        _block(target, covariance_path, ("kind", "scale"), ("variance",))
        step = _numbers(data.get("lag_step", 0.05), _join(path, "lag_step"))[0]
        count = _integer(data.get("lag_count", 401), _join(path, "lag_count"), 1)
        scale = _numbers(target["scale"], _join(covariance_path, "scale"))[0]
        factory = CovarianceTable.gaussian if kind == "gaussian" else CovarianceTable.exponential
        covariance = _build(covariance_path, factory, scale, step, count, variance)
    elif kind == "table":
        _block(target, covariance_path, ("kind", "path"), ("variance",))
        covariance = _build(
            _join(covariance_path, "path"), CovarianceTable.from_csv, root / target["path"],
            variance if "variance" in target else None,
        )
    else:
        raise ConfigError(f"unknown covariance kind {kind!r}", _join(covariance_path, "kind"))
    design_root = data.get("root", "even")
    if design_root not in ("even", "odd"):
        raise ConfigError("root must be 'even' or 'odd'", _join(path, "root"))
    return DesignConfig(covariance, design_root)


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    """
    A validated experiment.

    ### Arguments
    - model (VmmmaModel): The model, on the grid step
    - grid (GridSpec): Target lattice
    - run (RunConfig): The run block
    - output (Path): Output directory
    - design (DesignConfig | None): Kernel design settings
    - raw (dict[str, Any]): The JSON the experiment was read from

    ### Returns
    - None
    """

    model: VmmmaModel
    grid: GridSpec
    run: RunConfig
    output: Path
    design: DesignConfig | None = None
    raw: dict[str, Any] = field(default_factory=dict)

    def with_overrides(self, seed: int | None = None, reps: int | None = None, out: Path | None = None) -> ExperimentConfig:
        """Apply the --seed, --reps and --out command line overrides"""
        run = self.run
        if seed is not None:
            run = _build("--seed", RunConfig, **{**run.__dict__, "master_seed": _integer(seed, "--seed", 0)})
        if reps is not None:
            run = _build("--reps", RunConfig, **{**run.__dict__, "n_reps": _integer(reps, "--reps", 2)})
        return ExperimentConfig(self.model, self.grid, run, Path(out) if out is not None else self.output, self.design, self.raw)


def parse_config(data: Any, root: Path | str = ".") -> ExperimentConfig:
    """
    Validate a config object and build every domain object it describes.

    ### Arguments
    - data (Any): The decoded JSON
    - root (Path | str): Directory relative paths are resolved against

    ### Returns
    - ExperimentConfig: The experiment, raising ConfigError with the offending path otherwise
    """
    root = Path(root)
    _block(data, "", ("model", "grid"), ("run", "output", "design"))
    grid = parse_grid(data["grid"])
    model_block = _block(data["model"], "model", ("kernel_g", "volatility"))
    kernel_g = parse_kernel(model_block["kernel_g"], "model.kernel_g", root)
    volatility = parse_volatility(model_block["volatility"], "model.volatility", root)
    model = _build(
        "model", VmmmaModel, kernel_g, volatility, grid.grid.step, grid.tolerance, grid.max_radius
    )
    run = parse_run(data.get("run", {}))
    output = _block(data.get("output", {}), "output", optional=("directory",))
    design = parse_design(data["design"], root) if "design" in data else None
    if not run.hurst:
        run = replace(run, hurst=(0.5,) * grid.grid.dim)
    elif len(run.hurst) != grid.grid.dim:
        raise ConfigError(f"expected {grid.grid.dim} Hurst indices", "run.hurst")
    for index, lag in enumerate(run.lags):
        if len(lag) != grid.grid.dim:
            raise ConfigError(f"expected a lag of dimension {grid.grid.dim}", f"run.lags[{index}]")
        _build(f"run.lags[{index}]", grid.grid.lag_index, lag)
    for index, point in enumerate(run.points):
        if len(point) != grid.grid.dim:
            raise ConfigError(f"expected a point of dimension {grid.grid.dim}", f"run.points[{index}]")
    if not np.all(np.isfinite(run.theta_grid)):
        raise ConfigError("thetas must be finite", "run.theta_grid")
    return ExperimentConfig(model, grid.grid, run, root / output.get("directory", "results"), design, data)


def load_config(path: Path | str) -> ExperimentConfig:
    """Read a config file with json.load; relative paths inside are resolved against its directory"""
    path = Path(path)
    if not path.is_file():
        raise ConfigError("config file not found", str(path))
    with open(path, "r", encoding="utf-8") as file:
        data = json.load(file)
    return parse_config(data, path.parent)
