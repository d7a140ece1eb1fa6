import argparse
import json
import sys
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional, TextIO, Tuple

from pydantic import ValidationError

from .. import __version__
from ..config.logging import bind_run_context, get_logger
from ..config.settings import Settings, WaveformConfig
from ..database.connection import DatabaseManager
from ..factories.system_factory import SystemFactory
from ..models.enums import Quadrature, SigmaMode, SweepParameter
from ..models.errors import ConfigurationError
from ..models.simulation import RESULT_COLUMNS, RunManifest, SimConfig
from ..models.zx import ZxAlphabet, ZxFrame
from ..repositories.run_repo import RunRepository
from ..services.bound_service import BoundService
from ..services.modulation_service import ModulationService
from ..services.mvn_service import MvnService
from ..services.precoding_service import PrecodingService
from ..services.qp_service import QpService
from ..services.simulation_service import ROLE_BITS_I, ROLE_BITS_Q, SimulationService, stream
from ..utils.results_io import (
    format_table,
    parse_channel_inline,
    parse_grid,
    read_channel_csv,
    write_json,
    write_rows_csv,
)

logger = get_logger(__name__)

BOUND_COLUMNS = ["gamma", "ser_ub", "ber_ub"]
CDF_COLUMNS = ["ser", "cdf"]
SUMMARY_COLUMNS = ["gamma", "ser_mc", "ser_ci_lo", "ser_ci_hi", "ser_ub", "ber_mc", "etx", "snr_req_db"]

# Command-line flag -> SimConfig field
_SIM_FLAGS = {
    "mrx": "m_rx",
    "mtx": "m_tx",
    "n": "n_symbols",
    "ntx": "n_tx",
    "nu": "n_u",
    "sigma2": "sigma2",
    "n0": "n0",
    "trials": "trials",
    "batch_size": "batch_size",
    "max_errors": "max_errors",
    "seed": "seed",
    "sigma_mode": "sigma_mode",
    "channel_mode": "channel_mode",
    "workers": "workers",
}

_GRID_FLAGS = {
    "gamma_grid": SweepParameter.GAMMA,
    "ser_grid": SweepParameter.TARGET_SER,
    "n_grid": SweepParameter.N_SYMBOLS,
    "ntx_grid": SweepParameter.N_TX,
}


def load_experiment_file(path: Path) -> Dict[str, Any]:
    """Flat SimConfig fields from a TOML or JSON file"""
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"Config file {path} does not exist")

    try:
        if path.suffix == ".toml":
            with open(path, "rb") as f:
                data = tomllib.load(f)
        elif path.suffix == ".json":
            with open(path) as f:
                data = json.load(f)
        else:
            raise ConfigurationError(f"Config file {path} must end in .toml or .json")
    except (tomllib.TOMLDecodeError, json.JSONDecodeError) as e:
        raise ConfigurationError(f"{path}: {e}") from e

    if not isinstance(data, dict):
        raise ConfigurationError(f"{path}: top level must be a table of experiment fields")
    return data


def describe_validation_error(error: ValidationError) -> str:
    """One 'field.path: message' entry per violation"""
    parts = []
    for item in error.errors():
        location = ".".join(str(p) for p in item["loc"]) or "config"
        parts.append(f"{location}: {item['msg']}")
    return "; ".join(parts)


class ExperimentCommands:
    """Handlers of the ser-bound, simulate and design sub-commands"""

    def __init__(
        self,
        settings: Settings,
        simulation_service: SimulationService,
        precoding_service: PrecodingService,
        system_factory: SystemFactory,
        modulation_service: ModulationService,
        mvn_service: MvnService,
        out: Optional[TextIO] = None
    ):
        self.settings = settings
        self.simulation_service = simulation_service
        self.precoding_service = precoding_service
        self.system_factory = system_factory
        self.modulation_service = modulation_service
        self.mvn_service = mvn_service
        self.out = out or sys.stdout

    @classmethod
    def from_settings(cls, settings: Settings, out: Optional[TextIO] = None) -> "ExperimentCommands":
        """Wire all services from one settings object"""
        modulation = ModulationService()
        mvn = MvnService(settings.bound)
        precoding = PrecodingService(QpService(settings.solver), workers=settings.simulation.workers)
        factory = SystemFactory()
        simulation = SimulationService(factory, modulation, precoding, mvn, settings.bound)
        return cls(settings, simulation, precoding, factory, modulation, mvn, out)

    def cmd_ser_bound(self, args: argparse.Namespace) -> int:
        """SER/BER bound at one gamma, at the gamma meeting a target, or over a gamma grid"""
        started = datetime.now(timezone.utc)
        alphabet = ZxAlphabet(args.mrx)
        mode = SigmaMode(args.sigma_mode) if args.sigma_mode else self.settings.bound.sigma_mode
        bind_run_context(m_rx=args.mrx, sigma_mode=mode.value)
        bound = self._bound_service(mode, args.rolloff_rx)
        sigma = bound.bound_covariance(alphabet, args.sigma2, mode)
        out_dir = self._out_dir(args)

        outputs: List[Path] = []
        if args.gamma_grid:
            reports = bound.ser_curve(parse_grid(args.gamma_grid), sigma, alphabet, mode)
            rows = [{"gamma": r.gamma, "ser_ub": r.ser_ub, "ber_ub": r.ber_ub} for r in reports]
            outputs.append(write_rows_csv(out_dir / "ser_bound.csv", rows, BOUND_COLUMNS))
            report = reports[-1]
        else:
            gamma = args.gamma
            if args.target_ser is not None:
                gamma = bound.gamma_for_ser(args.target_ser, sigma, alphabet)
            report = bound.ser_upper_bound(gamma, sigma, alphabet, mode)
            rows = [{"gamma": report.gamma, "ser_ub": report.ser_ub, "ber_ub": report.ber_ub}]

        summary = {**report.to_dict(), "target_ser": args.target_ser}
        outputs.insert(0, write_json(out_dir / "ser_bound.json", summary))

        manifest = RunManifest(
            command="ser-bound",
            tool_version=__version__,
            seed=self.settings.bound.seed,
            config={
                "m_rx": args.mrx,
                "sigma2": args.sigma2,
                "sigma_mode": mode.value,
                "gamma": args.gamma,
                "target_ser": args.target_ser,
                "gamma_grid": args.gamma_grid,
                "rolloff_rx": bound.waveform.rolloff_rx,
                "bound": self.settings.bound.model_dump(mode="json"),
            },
            started_at=started
        )
        self._finish(manifest, out_dir / "ser_bound.manifest.json", outputs, rows, args)

        print(format_table(rows, BOUND_COLUMNS), file=self.out)
        return 0

    def cmd_simulate(self, args: argparse.Namespace) -> int:
        """Monte Carlo point, sweep or SER CDF; writes the results CSV and its manifest"""
        started = datetime.now(timezone.utc)
        config, options = self.build_sim_config(args)
        bind_run_context(
            m_rx=config.m_rx,
            seed=config.seed,
            sweep=config.sweep_parameter.value if config.sweep_parameter else None
        )
        out_dir = self._out_dir(args)
        cdf_channels = options.get("cdf_channels")

        exit_code = 0
        if cdf_channels:
            result = self.simulation_service.ser_cdf(config, int(cdf_channels))
            rows = result.rows()
            outputs = [write_rows_csv(out_dir / "ser_cdf.csv", rows, CDF_COLUMNS)]
            summary = [{"gamma": result.gamma, "target_ser": config.target_ser,
                        "fraction_met": result.evaluate(config.target_ser) if config.target_ser else None,
                        "channels": int(cdf_channels)}]
            table = format_table(summary, ["gamma", "target_ser", "fraction_met", "channels"])
        else:
            if config.sweep_parameter is not None:
                sweep_rows = self.simulation_service.sweep(config)
                rows = [row.to_row() for row in sweep_rows]
                if not any(row.ok for row in sweep_rows):
                    exit_code = 1
            else:
                rows = [self.simulation_service.monte_carlo(config).to_row()]
                rows[0].update({"n_symbols": config.n_symbols, "n_tx": config.n_tx,
                                "target_ser": config.target_ser, "error": ""})
            outputs = [write_rows_csv(out_dir / "simulate.csv", rows, RESULT_COLUMNS)]
            table = format_table(rows, SUMMARY_COLUMNS + ["error"])

        manifest = RunManifest(
            command="simulate",
            tool_version=__version__,
            seed=config.seed,
            config=config.model_dump(mode="json"),
            options=options,
            started_at=started
        )
        self._finish(manifest, out_dir / "simulate.manifest.json", outputs, rows, args)

        print(table, file=self.out)
        return exit_code

    def cmd_design(self, args: argparse.Namespace) -> int:
        """QoS precoders for one channel; writes p_x per user and quadrature with KKT diagnostics"""
        started = datetime.now(timezone.utc)
        h = parse_channel_inline(args.channel) if args.channel else read_channel_csv(Path(args.channel_file))
        bind_run_context(m_rx=args.mrx, seed=args.seed)
        n_u, n_tx = h.shape

        waveform = self._waveform(args.rolloff_rx)
        dims = self.system_factory.create_dims(args.n, args.mrx, args.mtx, n_tx, n_u)
        system = self.system_factory.create_system(dims, waveform)
        alphabet = ZxAlphabet(args.mrx)
        spatial = self.precoding_service.zf_precoder(h)

        gamma = args.gamma
        if args.target_ser is not None:
            mode = SigmaMode(args.sigma_mode) if args.sigma_mode else self.settings.bound.sigma_mode
            bound = self._bound_service(mode, args.rolloff_rx)
            gamma = bound.gamma_for_ser(args.target_ser, bound.bound_covariance(alphabet, args.sigma2, mode), alphabet)

        frames = self._design_frames(alphabet, dims.n_symbols, n_u, args.seed, waveform.pilot)
        temporal = self.precoding_service.qos_precode(frames, system, spatial.c_zf, gamma)
        e_tx = self.precoding_service.total_transmit_energy(spatial.p_sp, temporal, system.w)
        _, snr_db = self.precoding_service.snr_required(e_tx, dims.n_q, args.n0, waveform.rolloff_tx)
        margins = self.precoding_service.noiseless_margins(temporal, frames, system)

        users = []
        for entry, (user, quadrature) in zip(temporal.to_dict(), self._streams(n_u)):
            frame = frames[user][0 if quadrature == Quadrature.IN_PHASE else 1]
            users.append({**entry, "symbols": list(frame.symbols), "c_out": frame.c_out.tolist()})

        design = {
            "gamma": gamma,
            "beta": spatial.c_zf,
            "e_tx": e_tx,
            "snr_req_db": snr_db,
            "min_margin": min(margins),
            "dims": dims.to_dict(),
            "precoders": users,
        }
        out_dir = self._out_dir(args)
        outputs = [write_json(out_dir / "design.json", design)]

        manifest = RunManifest(
            command="design",
            tool_version=__version__,
            seed=args.seed,
            config={
                "channel": [[f"{z.real!r}{z.imag:+}i" for z in row] for row in h],
                "m_rx": args.mrx,
                "m_tx": args.mtx,
                "n_symbols": args.n,
                "gamma": gamma,
                "target_ser": args.target_ser,
            },
            started_at=started
        )
        rows = [{"user": u["user"], "quadrature": u["quadrature"], "objective": u["objective"],
                 "max_violation": u["max_violation"], "kkt_residual": u["kkt_residual"]} for u in users]
        self._finish(manifest, out_dir / "design.manifest.json", outputs, rows, args)

        print(format_table(rows, ["user", "quadrature", "objective", "max_violation", "kkt_residual"]), file=self.out)
        return 0

    def build_sim_config(self, args: argparse.Namespace) -> Tuple[SimConfig, Dict[str, Any]]:
        """Defaults from settings, then config file, then flags; a manifest replays as-is"""
        if getattr(args, "from_manifest", None):
            manifest = RunManifest.load(Path(args.from_manifest))
            if manifest.command != "simulate":
                raise ConfigurationError(f"Manifest {args.from_manifest} was written by '{manifest.command}'")
            return self._validate(manifest.config), dict(manifest.options)

        sim = self.settings.simulation
        data: Dict[str, Any] = {
            "trials": sim.trials,
            "batch_size": sim.batch_size,
            "seed": sim.seed,
            "channel_mode": sim.channel_mode.value,
            "workers": sim.workers,
            "sigma_mode": self.settings.bound.sigma_mode.value,
            "rolloff_tx": self.settings.waveform.rolloff_tx,
            "rolloff_rx": self.settings.waveform.rolloff_rx,
            "rho0": self.settings.waveform.pilot,
        }
        if getattr(args, "config", None):
            data.update(load_experiment_file(Path(args.config)))

        for flag, field in _SIM_FLAGS.items():
            value = getattr(args, flag, None)
            if value is not None:
                data[field] = value

        if args.gamma is not None or args.target_ser is not None:
            data.pop("gamma", None)
            data.pop("target_ser", None)
            data.pop("sweep_parameter", None)
            data.pop("sweep_values", None)
            if args.gamma is not None:
                data["gamma"] = args.gamma
            else:
                data["target_ser"] = args.target_ser

        for flag, parameter in _GRID_FLAGS.items():
            text = getattr(args, flag, None)
            if text:
                if parameter in (SweepParameter.GAMMA, SweepParameter.TARGET_SER):
                    data.pop("gamma", None)
                    data.pop("target_ser", None)
                data["sweep_parameter"] = parameter.value
                data["sweep_values"] = parse_grid(text)

        if getattr(args, "no_bound", False):
            data["include_bound"] = False

        options: Dict[str, Any] = {}
        if getattr(args, "cdf", False):
            options["cdf_channels"] = args.channels
        return self._validate(data), options

    def _validate(self, data: Dict[str, Any]) -> SimConfig:
        try:
            return SimConfig.model_validate(data)
        except ValidationError as e:
            raise ConfigurationError(f"Invalid experiment config: {describe_validation_error(e)}") from e

    def _design_frames(self, alphabet: ZxAlphabet, n_symbols: int, n_u: int, seed: int, pilot: int) -> List[Tuple[ZxFrame, ZxFrame]]:
        """Random Gray-coded frames per user and quadrature from the design seed"""
        if n_symbols % alphabet.block_symbols != 0:
            raise ConfigurationError(f"N={n_symbols} must be a multiple of {alphabet.block_symbols} for M_Rx={alphabet.m_rx}")

        n_bits = n_symbols // alphabet.block_symbols * alphabet.n_bits
        frames = []
        for user in range(n_u):
            pair = []
            for role in (ROLE_BITS_I, ROLE_BITS_Q):
                bits = stream(seed, 0, user, role).integers(0, 2, size=n_bits).tolist()
                symbols = self.modulation_service.gray_encode(bits, alphabet)
                frame = self.modulation_service.encode(symbols, pilot, alphabet)
                pair.append(ZxFrame(frame.symbols, pilot, frame.c_out, alphabet.m_rx, bits))
            frames.append((pair[0], pair[1]))
        return frames

    def _streams(self, n_u: int) -> List[Tuple[int, Quadrature]]:
        # Same order as TemporalPrecoder.to_dict
        return sorted(
            ((user, q) for user in range(n_u) for q in Quadrature),
            key=lambda item: (item[0], item[1].value)
        )

    def _bound_service(self, mode: SigmaMode, rolloff_rx: Optional[float]) -> BoundService:
        config = self.settings.bound.model_copy(update={"sigma_mode": mode})
        return BoundService(self.modulation_service, self.mvn_service, config, self._waveform(rolloff_rx))

    def _waveform(self, rolloff_rx: Optional[float]) -> WaveformConfig:
        waveform = self.settings.waveform
        if rolloff_rx is not None:
            waveform = waveform.model_copy(update={"rolloff_rx": rolloff_rx})
        return waveform

    def _out_dir(self, args: argparse.Namespace) -> Path:
        return Path(getattr(args, "out", None) or self.settings.output.results_dir)

    def _finish(
        self,
        manifest: RunManifest,
        path: Path,
        outputs: List[Path],
        rows: List[Dict[str, Any]],
        args: argparse.Namespace
    ) -> None:
        manifest.outputs = [str(p) for p in outputs]
        manifest.finished_at = datetime.now(timezone.utc)
        manifest.save(path)
        logger.info("Run written", command=manifest.command, manifest=str(path), outputs=manifest.outputs)

        archive_url = getattr(args, "archive", None) or self.settings.output.archive_url
        if archive_url:
            self._archive(archive_url, manifest, rows)

    def _archive(self, url: str, manifest: RunManifest, rows: List[Dict[str, Any]]) -> None:
        manager = DatabaseManager(url)
        manager.initialize()
        try:
            session = manager.get_session()
            try:
                run = RunRepository(session).record(manifest, rows)
                logger.info("Run archived", run_id=run.id, command=manifest.command)
            finally:
                session.close()
        finally:
            manager.close()
