"""Command-line front end: transform, estimate and separate."""

import argparse
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional

import numpy as np
from pydantic import ValidationError

from src.model.run_config import GENERATORS, Command, RunConfig
from src.model.signal import Signal
from src.model.tracks import SigmaTrack
from src.service.cwt_service import CwtService
from src.service.estimation_service import EstimationService
from src.service.reconstruction_service import ReconstructionService, rmse
from src.service.separability_service import SeparabilityService
from src.service.signal_service import SignalService
from src.service.sst_service import SstService
from src.utils import csv_io
from src.utils.config import Config
from src.utils.plotting import plot_plane, plot_tracks

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_CONFIG, EXIT_COMPUTE = 0, 1, 2


class AnalysisRunner:
    """Runs one command of the adaptive SST pipeline and writes its CSV and PNG outputs"""

    def __init__(self, config: RunConfig):
        self.config = config
        self.params = config.wavelet_params()
        self.signals = SignalService()
        self.cwt = CwtService(self.params)
        self.sst = SstService(self.params, gamma_rel=config.gamma_rel, cwt=self.cwt)
        self.estimation = EstimationService(self.params, cwt=self.cwt, sst=self.sst,
                                            n_voices=config.n_voices)
        self.separability = SeparabilityService(self.params)
        self.reconstruction = ReconstructionService(self.params)
        self.output_dir = Path(config.output_dir)
        self.written: List[Path] = []

    def run(self) -> List[Path]:
        self.output_dir.mkdir(parents=True, exist_ok=True)
        handlers = {
            Command.TRANSFORM: self.cmd_transform,
            Command.ESTIMATE: self.cmd_estimate,
            Command.SEPARATE: self.cmd_separate,
        }
        handlers[self.config.command]()
        logger.info(f"{self.config.command.value}: wrote {len(self.written)} files to {self.output_dir}")
        return self.written

    def load_signal(self) -> Signal:
        cfg = self.config
        if cfg.signal is not None:
            x = self.signals.generate(cfg.signal, cfg.n)
        else:
            x = self.signals.load_csv(cfg.input_path, cfg.sample_rate)
        if cfg.snr_db is not None:
            x = self.signals.add_noise(x, cfg.snr_db, cfg.seed)
        return x

    def _meta(self, **extra) -> Dict:
        meta = self.config.metadata()
        meta.update({k: str(v) for k, v in extra.items()})
        return meta

    def _plane_outputs(self, name: str, data: np.ndarray, axis: np.ndarray, times: np.ndarray,
                       axis_name: str, title: str) -> None:
        path = self.output_dir / f"{name}.csv"
        self.written.append(csv_io.write_plane_csv(path, data, axis, times, axis_name, self._meta(plane=name)))
        if self.config.plots:
            is_scale = axis_name == "scale"
            self.written.append(plot_plane(self.output_dir / f"{name}.png", data, axis, times, title,
                                           ylabel="Scale (s)" if is_scale else "Frequency (Hz)",
                                           log_axis=is_scale))

    def _sst_outputs(self, x: Signal, sigma_of_b, label: str, sigma_grid=None) -> None:
        grid = self.cwt.make_scale_grid(len(x), self.config.n_voices, x.dt)
        for order in (1, 2):
            tf, _, bundle = self.sst.transform(x, sigma_of_b, grid, order=order, sigma_grid=sigma_grid)
            if order == 1:
                self._plane_outputs(f"cwt_{label}", bundle.w.data, grid.values, x.times, "scale",
                                    f"CWT ({label})")
            name = "sst" if order == 1 else "sst2"
            self._plane_outputs(f"{name}_{label}", tf.data, tf.freq_grid, x.times, "frequency",
                                f"Order-{order} SST ({label})")

    def _sigma_track(self, x: Signal) -> SigmaTrack:
        cfg = self.config
        return self.estimation.estimate_sigma(x, cfg.sigma_grid(), cfg.zeta, cfg.ell, cfg.gamma3,
                                              cfg.smoothing_weights())

    def cmd_transform(self) -> None:
        cfg = self.config
        x = self.load_signal()
        self._sst_outputs(x, cfg.sigma, "conventional")
        if cfg.sigma_track_path is not None:
            columns = csv_io.read_table_csv(cfg.sigma_track_path)
            track = columns.get("sigma_est", columns.get("sigma"))
            if track is None:
                raise ValueError(f"{cfg.sigma_track_path}: needs a 'sigma_est' or 'sigma' column")
            self._sst_outputs(x, track, "adaptive", sigma_grid=cfg.sigma_grid())
        elif cfg.estimate_sigma:
            track = self._sigma_track(x)
            self._sst_outputs(x, track.sigma_est, "adaptive", sigma_grid=cfg.sigma_grid())

    def cmd_estimate(self) -> None:
        cfg = self.config
        x = self.load_signal()
        track = self._sigma_track(x)
        columns = {"t": track.times, "sigma_u": track.sigma_u, "C": track.C, "sigma_est": track.sigma_est}

        laws = self.signals.parse_laws(cfg.laws) if cfg.laws else None
        if laws is not None:
            sep = self.separability.separability_track(laws, track.times)
            track.sigma1, track.sigma2 = sep.sigma1, sep.sigma2
            columns.update(sigma1=sep.sigma1, sigma2=sep.sigma2)
            self.written.append(csv_io.write_table_csv(
                self.output_dir / "separability.csv",
                {"t": sep.times, "sigma1": sep.sigma1, "sigma2": sep.sigma2,
                 "separable": sep.separable.astype(float), "min_margin": sep.min_margin},
                self._meta()))
        if cfg.renyi_sst:
            grid = cfg.sigma_grid()
            columns["sigma_re"] = self.estimation.sigma_renyi_sst(x, grid, cfg.zeta, cfg.ell, order=1)
            columns["sigma_re2"] = self.estimation.sigma_renyi_sst(x, grid, cfg.zeta, cfg.ell, order=2)

        self.written.append(csv_io.write_table_csv(self.output_dir / "sigma_track.csv", columns, self._meta()))
        if cfg.plots:
            tracks = {k: v for k, v in columns.items() if k not in ("t", "C")}
            self.written.append(plot_tracks(self.output_dir / "sigma_track.png", track.times, tracks,
                                            "Window parameter tracks"))

    def _ground_truth(self, x: Signal) -> Optional[List[Signal]]:
        cfg = self.config
        if cfg.signal == "three-component":
            return self.signals.three_component_parts(len(x))
        if cfg.signal == "two-chirps":
            return self.signals.two_chirp_parts(len(x))
        return None

    def cmd_separate(self) -> None:
        cfg = self.config
        x = self.load_signal()
        track = self._sigma_track(x)
        grid = self.cwt.make_scale_grid(len(x), cfg.n_voices, x.dt)
        tf, _, _ = self.sst.transform(x, track.sigma_est, grid, order=2, sigma_grid=cfg.sigma_grid())
        ridges = self.reconstruction.extract_ridges(tf, cfg.n_components, cfg.band)
        mode = "real" if x.is_real else "analytic"

        components = [
            self.reconstruction.recover_component(tf, ridge, cfg.band, mode=mode) for ridge in ridges.ridges
        ]
        # report components in increasing frequency order
        components.sort(key=lambda comp: float(np.median(comp.ridge_hz)))
        for k, comp in enumerate(components, start=1):
            samples = np.asarray(comp.samples)
            self.written.append(csv_io.write_table_csv(
                self.output_dir / f"component_{k}.csv",
                {"t": comp.times, "real": samples.real, "imag": np.imag(samples), "ridge_Hz": comp.ridge_hz},
                self._meta(component=k, complete=ridges.complete)))

        truth = self._ground_truth(x)
        if truth is not None and len(components) == len(truth):
            errors = [
                rmse(part, Signal(comp.samples, sample_rate=x.sample_rate), 0.1, 0.9)
                for part, comp in zip(truth, components)
            ]
            self.written.append(csv_io.write_table_csv(
                self.output_dir / "report.csv",
                {"component": np.arange(1, len(errors) + 1), "rmse": errors}, self._meta()))
            logger.info(f"Component relative RMSE on [0.1, 0.9]: {np.round(errors, 4).tolist()}")
        if cfg.plots:
            self._plane_outputs("sst2_adaptive", tf.data, tf.freq_grid, x.times, "frequency",
                                "Order-2 adaptive SST")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="adaptive-sst", description="Adaptive synchrosqueezing toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    source = common.add_mutually_exclusive_group()
    source.add_argument("--signal", choices=GENERATORS, help="built-in test signal")
    source.add_argument("--input", dest="input_path", type=Path, help="CSV file with samples")
    common.add_argument("--sample-rate", type=float, help="override the CSV sample rate (Hz)")
    common.add_argument("--n", type=int, help="number of samples for generated signals")
    common.add_argument("--mu", type=float, default=Config.MU)
    common.add_argument("--tau0", type=float, default=Config.TAU0)
    common.add_argument("--n-voices", type=int, default=Config.N_VOICES)
    common.add_argument("--sigma-min", type=float, default=Config.SIGMA_MIN)
    common.add_argument("--sigma-max", type=float, default=Config.SIGMA_MAX)
    common.add_argument("--sigma-step", type=float, default=Config.SIGMA_STEP)
    common.add_argument("--ell", type=float, default=Config.RENYI_ORDER, help="Renyi entropy order")
    common.add_argument("--zeta", type=int, default=Config.RENYI_HALF_WINDOW, help="entropy half-window (samples)")
    common.add_argument("--gamma3", type=float, default=Config.PEAK_THRESHOLD, help="peak threshold")
    common.add_argument("--band", type=int, default=Config.BAND_HALF_WIDTH, help="integration half-width (bins)")
    common.add_argument("--gamma-rel", type=float, default=Config.GAMMA_REL)
    common.add_argument("--smoothing-taps", type=int, default=Config.SMOOTHING_TAPS)
    common.add_argument("--seed", type=int, default=Config.NOISE_SEED)
    common.add_argument("--snr-db", type=float, help="add white Gaussian noise at this SNR")
    common.add_argument("--no-plots", dest="plots", action="store_false")
    common.add_argument("--output-dir", type=Path, default=Path(Config.OUTPUT_DIR))

    transform = sub.add_parser("transform", parents=[common], help="CWT and SST planes")
    transform.add_argument("--sigma", type=float, default=1.0, help="fixed sigma of the conventional transforms")
    transform.add_argument("--estimate-sigma", action="store_true", help="also compute the adaptive transforms")
    transform.add_argument("--sigma-track", dest="sigma_track_path", type=Path,
                           help="CSV with a sigma_est column to use as the adaptive track")

    estimate = sub.add_parser("estimate", parents=[common], help="estimate the sigma track")
    estimate.add_argument("--laws", help="ground-truth LFM laws 'c1,r1;c2,r2'")
    estimate.add_argument("--renyi-sst", action="store_true", help="add the entropy-optimal SST tracks")

    separate = sub.add_parser("separate", parents=[common], help="recover components")
    separate.add_argument("--n-components", type=int, default=2)
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    values = {k: v for k, v in vars(args).items() if v is not None}
    return RunConfig(**values)


def main(argv: Optional[List[str]] = None) -> int:
    """
    Entry point; returns the process exit code.

    Usage and validation errors give EXIT_CONFIG, failures while computing
    give EXIT_COMPUTE.
    """
    logging.basicConfig(level=Config.LOG_LEVEL, format="%(asctime)s %(name)s %(levelname)s %(message)s")
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        # --help exits 0, usage errors exit 2
        return EXIT_OK if e.code in (0, None) else EXIT_CONFIG
    try:
        config = config_from_args(args)
        if config.laws:
            SignalService().parse_laws(config.laws)
    except (ValidationError, ValueError) as e:
        logger.error(f"Invalid configuration: {e}")
        return EXIT_CONFIG

    try:
        AnalysisRunner(config).run()
    except Exception as e:
        logger.error(f"Error running {config.command.value}: {e}")
        return EXIT_COMPUTE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
