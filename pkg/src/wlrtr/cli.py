"""Batch command line: ``wlrtr {denoise,destripe,deblur,superres,degrade,metrics}``.

Every restoring command writes the output tensor, a text run log next to it
(``<output>.log`` unless ``--log`` is given) and, with ``--report DIR``, a
CSV of per-iteration values plus PNG figures.

Exit codes: 0 success, 2 usage, 3 bad magic, 4 truncated file, 5 bad
dimensions, 6 invalid config or parameter, 7 numerical failure, 1 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import platform
import re
import sys
import time

import numpy as np

from . import __version__
from .deblur import DeblurConfig, deblur
from .degradation import (
    DegradationSpec,
    KernelSpec,
    Psf,
    SpectralResponse,
    add_gaussian_noise,
    add_stripes,
    convolve,
    default_response,
    downsample_spatial,
    downsample_spectral,
    make_kernel,
)
from .denoise import DEFAULT_SOLVER_C, DenoiseConfig, denoise, estimate_sigma
from .destripe import DESTRIPE_C, DestripeConfig, destripe
from .grouping import GroupingConfig
from .quality import assess, psnr
from .report import write_report
from .shrinkage import ShrinkParams
from .superres import SuperresConfig, bilinear_upsample, superres
from .synthetic import material_scene
from .tensor_io import (
    ConfigError,
    TensorFormatError,
    export_band_images,
    load_matrix,
    load_raw,
    load_tensor,
    read_config,
    save_tensor,
    sidecar,
)

log = logging.getLogger("wlrtr")

_SYNTH = re.compile(r"^synthetic:(\d+)x(\d+)x(\d+)(?::(\d+))?$")


# ---------------------------------------------------------------- parsing


def _raw_spec(text: str) -> tuple[int, int, int, int]:
    parts = text.split(",")
    if len(parts) not in (3, 4):
        raise argparse.ArgumentTypeError("use ROWS,COLS,BANDS[,DTYPE] with DTYPE 0 (float32) or 1 (float64)")
    try:
        vals = [int(p) for p in parts] + ([1] if len(parts) == 3 else [])
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad --raw value {text!r}") from None
    return tuple(vals)


def _sigma(text: str):
    if text.strip().lower() == "auto":
        return "auto"
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"sigma must be a number or 'auto', got {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError("sigma must be nonnegative")
    return v


def _kernel(text: str) -> KernelSpec:
    try:
        return KernelSpec.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("common")
    g.add_argument("--threads", type=int, default=None, help="worker threads (default: all cores; 1 = sequential)")
    g.add_argument("--seed", type=int, default=0, help="random seed (64-bit unsigned)")
    g.add_argument("--raw", type=_raw_spec, default=None, metavar="R,C,B[,DT]",
                   help="read inputs as headerless band-sequential little-endian data")
    g.add_argument("--config", default=None, help="key=value file supplying option defaults")
    g.add_argument("--log", default=None, help="run log path (default: <output>.log)")
    g.add_argument("--report", default=None, metavar="DIR", help="write CSV tables and PNG figures here")
    g.add_argument("--reference", default=None, help="ground truth for PSNR in the log and report")
    g.add_argument("--export-bands", default=None, metavar="DIR", help="also write one P5 image per band")
    g.add_argument("-v", "--verbose", action="store_true")


def _grouping_opts(p: argparse.ArgumentParser, c_default: float) -> None:
    g = p.add_argument_group("prior")
    g.add_argument("--patch", type=int, default=7)
    g.add_argument("--k", type=int, default=140, help="similar cubics per group (excluding the key)")
    g.add_argument("--window", type=int, default=20)
    g.add_argument("--stride", type=int, default=4)
    g.add_argument("--c", type=float, default=c_default, help="weight constant of the shrinkage")
    g.add_argument("--eps", type=float, default=1e-6)


def _kernel_opts(p: argparse.ArgumentParser) -> None:
    p.add_argument("--kernel", type=_kernel, default=KernelSpec("gaussian", 8, 3.0),
                   help="gaussian:SIZE:STD, uniform:SIZE or delta (default gaussian:8:3)")
    p.add_argument("--kernel-file", default=None, help="text matrix; overrides --kernel")


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(prog="wlrtr", description="Weighted low-rank tensor restoration.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    subs = {}

    p = sub.add_parser("denoise", help="Gaussian noise removal")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--sigma", type=_sigma, required=True, help="noise level, or auto to estimate it")
    p.add_argument("--eta", type=float, default=0.1)
    p.add_argument("--iters", type=int, default=4)
    p.add_argument("--decay", type=float, default=0.9)
    _grouping_opts(p, DEFAULT_SOLVER_C)
    subs["denoise"] = p

    p = sub.add_parser("destripe", help="mixed stripe and Gaussian noise removal")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--sigma", type=_sigma, required=True, help="noise level, or auto to estimate it")
    p.add_argument("--rho", type=float, default=None, help="column threshold (default 5*sigma*sqrt(rows))")
    p.add_argument("--eta", type=float, default=0.1)
    p.add_argument("--iters", type=int, default=4)
    p.add_argument("--horizontal", action="store_true", help="stripes run along rows")
    p.add_argument("--stripes-out", default=None, help="also save the stripe component")
    _grouping_opts(p, DESTRIPE_C)
    subs["destripe"] = p

    p = sub.add_parser("deblur", help="non-blind deblurring")
    p.add_argument("input")
    p.add_argument("output")
    p.add_argument("--sigma", type=_sigma, default=0.0, help="noise level, or auto")
    _kernel_opts(p)
    p.add_argument("--eta", type=float, default=1e-8)
    p.add_argument("--alpha0", type=float, default=1e-3)
    p.add_argument("--delta", type=float, default=1.5)
    p.add_argument("--iters", type=int, default=10)
    _grouping_opts(p, DEFAULT_SOLVER_C)
    subs["deblur"] = p

    p = sub.add_parser("superres", help="fusion super-resolution")
    p.add_argument("input", help="low-resolution multiband tensor")
    p.add_argument("guide", help="high-resolution tensor with few channels")
    p.add_argument("output")
    p.add_argument("--scale", type=int, default=8)
    _kernel_opts(p)
    p.add_argument("--response-file", default=None, help="text matrix (channels x bands)")
    p.add_argument("--eta", type=float, default=1e-5)
    p.add_argument("--beta0", type=float, default=1e-3)
    p.add_argument("--gamma0", type=float, default=1e-3)
    p.add_argument("--delta", type=float, default=1.5)
    p.add_argument("--iters", type=int, default=15)
    p.add_argument("--cg-tol", type=float, default=1e-6)
    p.add_argument("--cg-max-iters", type=int, default=200)
    p.add_argument("--prior-sigma", type=float, default=1.0)
    _grouping_opts(p, DEFAULT_SOLVER_C)
    subs["superres"] = p

    p = sub.add_parser("degrade", help="simulate a degraded observation")
    p.add_argument("input", help="clean tensor, or synthetic:ROWSxCOLSxBANDS[:SEED]")
    p.add_argument("output")
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--stripe-fraction", type=float, default=0.0)
    p.add_argument("--stripe-amp", type=float, default=50.0)
    p.add_argument("--stripe-mode", choices=("additive", "multiplicative"), default="additive")
    p.add_argument("--kernel", type=_kernel, default=KernelSpec())
    p.add_argument("--kernel-file", default=None)
    p.add_argument("--scale", type=int, default=1)
    p.add_argument("--guide-out", default=None, help="also write the spectrally downsampled guide")
    p.add_argument("--channels", type=int, default=3, help="guide channels for the default response")
    p.add_argument("--response-file", default=None)
    p.add_argument("--truth-out", default=None, help="save the clean tensor (useful with synthetic:)")
    subs["degrade"] = p

    p = sub.add_parser("metrics", help="PSNR, SSIM, ERGAS and SAM against a reference")
    p.add_argument("input")
    p.add_argument("reference_tensor", metavar="reference")
    p.add_argument("--scale", type=int, default=1, help="resolution ratio used by ERGAS")
    p.add_argument("--per-band", action="store_true", help="append per-band PSNR as CSV")
    subs["metrics"] = p

    for p in subs.values():
        _common(p)
    return parser, subs


_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _apply_config(sub: argparse.ArgumentParser, path: str) -> None:
    actions = {a.dest: a for a in sub._actions if a.option_strings and a.dest not in ("help", "config")}
    values = read_config(path, allowed=set(actions))
    defaults = {}
    for key, text in values.items():
        a = actions[key]
        if isinstance(a, argparse._StoreTrueAction):
            low = text.lower()
            if low not in _TRUE | _FALSE:
                raise ConfigError(f"{path}: {key} expects true/false, got {text!r}")
            defaults[key] = low in _TRUE
            continue
        try:
            defaults[key] = a.type(text) if a.type else text
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise ConfigError(f"{path}: bad value for {key}: {exc}") from None
        if a.choices is not None and defaults[key] not in a.choices:
            raise ConfigError(f"{path}: {key} must be one of {sorted(a.choices)}")
    sub.set_defaults(**defaults)
    # options marked required are satisfied by the config
    for key in defaults:
        actions[key].required = False


def parse_args(argv):
    parser, subs = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    cmd = next((a for a in argv if a in subs), None)
    if cmd is not None and known.config:
        _apply_config(subs[cmd], known.config)
    return parser.parse_args(argv)


# ---------------------------------------------------------------- helpers


def _load(path: str, raw) -> np.ndarray:
    if raw is not None:
        return load_raw(path, *raw)
    return load_tensor(path)


def _psf(args) -> Psf:
    if args.kernel_file:
        return Psf.normalized(load_matrix(args.kernel_file))
    return make_kernel(args.kernel)


def _resolve_sigma(args, y, run: "RunLog") -> float:
    if args.sigma == "auto":
        sig = estimate_sigma(y)
        run.extra["sigma_estimated"] = repr(sig)
        return sig
    return float(args.sigma)


def _grouping(args) -> GroupingConfig:
    return GroupingConfig(patch=args.patch, k=args.k, window=args.window, stride=args.stride)


def _shrink(args) -> ShrinkParams:
    return ShrinkParams(c=args.c, eps=args.eps)


class RunLog:
    """Collects parameters and per-iteration values; written as plain text."""

    def __init__(self, command: str, params: dict):
        self.command = command
        self.params = params
        self.iterations: list[dict] = []
        self.extra: dict[str, str] = {}
        self.t0 = time.perf_counter()

    def record(self, it: int, label: str, value: float, energy: float) -> None:
        self.iterations.append({"iter": it, label: value, "energy": energy})
        log.info("iter %d %s=%.6g energy=%.10g", it, label, value, energy)

    def text(self) -> str:
        lines = [f"# wlrtr {__version__} {self.command}", f"# python {platform.python_version()} numpy {np.__version__}"]
        lines += [f"{k}={v}" for k, v in self.params.items()]
        for row in self.iterations:
            lines.append(" ".join(f"{k}={v!r}" if isinstance(v, float) else f"{k}={v}" for k, v in row.items()))
        lines += [f"{k}={v}" for k, v in self.extra.items()]
        lines.append(f"wall_time_s={time.perf_counter() - self.t0:.3f}")
        return "\n".join(lines) + "\n"


def _params(args) -> dict:
    skip = {"log", "report", "verbose", "config"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _finish(args, x: np.ndarray, run: RunLog, observed: np.ndarray | None = None, s: int = 1) -> None:
    save_tensor(args.output, x)
    per_band = baseline = None
    if args.reference:
        ref = _load(args.reference, None)
        rep = assess(x, ref, s)
        run.extra.update(psnr=f"{rep.psnr:.4f}", ssim=f"{rep.ssim:.4f}", ergas=f"{rep.ergas:.4f}", sam=f"{rep.sam:.4f}")
        per_band = rep.per_band_psnr
        if observed is not None and observed.shape == ref.shape:
            baseline = psnr(observed, ref)[1]
            run.extra["input_psnr"] = f"{np.mean(baseline):.4f}"
    if args.export_bands:
        export_band_images(x, args.export_bands)
    log_path = args.log or sidecar(args.output, ".log")
    with open(log_path, "w") as fh:
        fh.write(run.text())
    if args.report:
        write_report(args.report, run.iterations, per_band, baseline)


# ---------------------------------------------------------------- commands


def cmd_denoise(args) -> None:
    y = _load(args.input, args.raw)
    cfg = DenoiseConfig(grouping=_grouping(args), shrink=_shrink(args), eta=args.eta,
                        outer_iters=args.iters, sigma_decay=args.decay)
    run = RunLog("denoise", _params(args))
    res = denoise(y, _resolve_sigma(args, y, run), cfg, threads=args.threads,
                  callback=lambda i, x, s, e: run.record(i, "sigma", s, e))
    _finish(args, res.x, run, y)


def cmd_destripe(args) -> None:
    y = _load(args.input, args.raw)
    dn = DenoiseConfig(grouping=_grouping(args), shrink=_shrink(args), eta=args.eta)
    cfg = DestripeConfig(denoise=dn, rho=args.rho, outer_iters=args.iters)
    run = RunLog("destripe", _params(args))
    res = destripe(y, _resolve_sigma(args, y, run), cfg, threads=args.threads, horizontal=args.horizontal,
                   callback=lambda i, x, s, e: run.record(i, "sigma", s, e))
    run.extra["rho_used"] = repr(res.rho)
    if args.stripes_out:
        save_tensor(args.stripes_out, res.e)
    _finish(args, res.x, run, y)


def cmd_deblur(args) -> None:
    y = _load(args.input, args.raw)
    cfg = DeblurConfig(eta=args.eta, alpha0=args.alpha0, delta=args.delta, outer_iters=args.iters,
                       shrink=_shrink(args), grouping=_grouping(args))
    run = RunLog("deblur", _params(args))
    res = deblur(y, _psf(args), _resolve_sigma(args, y, run), cfg, threads=args.threads,
                 callback=lambda i, x, a, e: run.record(i, "alpha", a, e))
    _finish(args, res.x, run, y)


def cmd_superres(args) -> None:
    y = _load(args.input, args.raw)
    z = _load(args.guide, None)
    sr = SpectralResponse(load_matrix(args.response_file)) if args.response_file else default_response(y.shape[2], z.shape[2])
    cfg = SuperresConfig(scale=args.scale, eta=args.eta, beta0=args.beta0, gamma0=args.gamma0, delta=args.delta,
                         outer_iters=args.iters, cg_tol=args.cg_tol, cg_max_iters=args.cg_max_iters,
                         sigma=args.prior_sigma, shrink=_shrink(args), grouping=_grouping(args))
    run = RunLog("superres", _params(args))
    res = superres(y, z, _psf(args), sr, cfg, threads=args.threads,
                   callback=lambda i, x, b, e: run.record(i, "beta", b, e))
    run.extra["cg_iters"] = ",".join(map(str, res.cg_iters))
    _finish(args, res.x, run, bilinear_upsample(y, args.scale), s=args.scale)


def cmd_degrade(args) -> None:
    m = _SYNTH.match(args.input)
    if m:
        rows, cols, bands = (int(v) for v in m.groups()[:3])
        t = material_scene(rows, cols, bands, seed=int(m.group(4) or 0))
    else:
        t = _load(args.input, args.raw)
    kernel = KernelSpec("delta") if args.kernel_file else args.kernel
    spec = DegradationSpec(sigma=args.sigma, stripe_fraction=args.stripe_fraction, stripe_amp=args.stripe_amp,
                           stripe_mode=args.stripe_mode, kernel=kernel, scale=args.scale, seed=args.seed)
    psf = _psf(args)
    out = t
    if args.scale > 1:
        out = downsample_spatial(out, psf, args.scale)
    elif psf.kernel.size > 1:
        out = convolve(out, psf)
    out = add_stripes(out, spec)
    out = add_gaussian_noise(out, spec.sigma, spec.seed)
    save_tensor(args.output, out)
    if args.guide_out:
        sr = SpectralResponse(load_matrix(args.response_file)) if args.response_file else default_response(t.shape[2], args.channels)
        save_tensor(args.guide_out, downsample_spectral(t, sr))
    if args.truth_out:
        save_tensor(args.truth_out, t)
    if args.export_bands:
        export_band_images(out, args.export_bands)
    log_path = args.log or sidecar(args.output, ".log")
    with open(log_path, "w") as fh:
        fh.write(spec.as_text())
        if args.kernel_file:
            fh.write(f"kernel_file={args.kernel_file}\n")


def cmd_metrics(args) -> None:
    x = _load(args.input, args.raw)
    ref = _load(args.reference_tensor, args.raw)
    rep = assess(x, ref, args.scale)
    lines = rep.lines()
    if args.per_band:
        lines.append("band,psnr")
        lines += [f"{b},{v:.4f}" for b, v in enumerate(rep.per_band_psnr)]
    print("\n".join(lines))
    if args.report:
        write_report(args.report, [], rep.per_band_psnr)


COMMANDS = {
    "denoise": cmd_denoise,
    "destripe": cmd_destripe,
    "deblur": cmd_deblur,
    "superres": cmd_superres,
    "degrade": cmd_degrade,
    "metrics": cmd_metrics,
}


def run_cli(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except ConfigError as exc:
        print(f"wlrtr: {exc}", file=sys.stderr)
        return exc.code
    except OSError as exc:
        print(f"wlrtr: {exc}", file=sys.stderr)
        return 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        COMMANDS[args.command](args)
    except (TensorFormatError, ConfigError) as exc:
        print(f"wlrtr: {exc}", file=sys.stderr)
        return exc.code
    except ArithmeticError as exc:
        print(f"wlrtr: numerical failure: {exc}", file=sys.stderr)
        return 7
    except ValueError as exc:
        print(f"wlrtr: {exc}", file=sys.stderr)
        return 6
    except OSError as exc:
        print(f"wlrtr: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run_cli())
