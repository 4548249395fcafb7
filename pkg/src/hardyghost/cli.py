"""Command-line front end: ``hardyghost <subcommand> [options]``."""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

from .analysis import object_mask
from .detection import GrayImage
from .io import FormatError, format_keyvalue
from .pipeline import (CHANNEL_NAMES, ExperimentConfig, PipelineError, acquire, analyze,
                       build_object, cnr_table, format_config, load_config, load_images,
                       noise_free_images, parse_config, preset, report_dict, run_pipeline,
                       write_images)
from .polarization import (HardyDegenerateError, PolarizationState, hardy_probability,
                           optimize_hardy, solve_hardy_angles, zero_conditions)


def _resolve_config(args) -> ExperimentConfig:
    cfg = preset(args.preset) if args.preset else ExperimentConfig()
    if args.config:
        cfg = load_config(args.config, cfg)
    if args.set:
        cfg = parse_config("\n".join(args.set), cfg)
    if args.seed is not None:
        cfg = cfg.replace(seed=args.seed)
    return cfg


def _emit(pairs: dict) -> None:
    sys.stdout.write(format_keyvalue(pairs))


def cmd_optimize(args) -> int:
    best = optimize_hardy()
    _emit({"alpha": best.alpha, "beta": best.beta, "probability": best.probability,
           **{f"{k}_deg": v for k, v in best.angles.degrees().items()}})
    return 0


def cmd_angles(args) -> int:
    angles = solve_hardy_angles(args.alpha, args.beta)
    state = PolarizationState.from_hardy(args.alpha, args.beta, math.pi)
    p1, p2, p3 = zero_conditions(state, angles)
    _emit({**{f"{k}_deg": v for k, v in angles.degrees().items()},
           "hardy_probability": hardy_probability(args.alpha, args.beta),
           "p_00": p1, "p_b01": p2, "p_1b0": p3})
    return 0


def cmd_image(args) -> int:
    cfg = _resolve_config(args)
    obj, _ = build_object(cfg)
    nf = noise_free_images(cfg, obj)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_images(out, {k: GrayImage(v, "ideal") for k, v in nf.rates.items()}, "intensity", csv=True)
    (out / "config.txt").write_text(format_config(cfg))
    _emit({f"probability.{k}": v for k, v in nf.probabilities.items()}
          | {"parseval_ratio": nf.parseval_ratio})
    return 0


def cmd_acquire(args) -> int:
    cfg = _resolve_config(args)
    obj, _ = build_object(cfg)
    acq = acquire(cfg, noise_free_images(cfg, obj), args.workers)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_images(out, acq.images, "image", csv=True)
    write_images(out, acq.raw, "raw")
    write_images(out, acq.background, "background")
    (out / "config.txt").write_text(format_config(cfg))
    return 0


def cmd_analyze(args) -> int:
    cfg = _resolve_config(args)
    obj, rois = build_object(cfg)
    images = load_images(args.images)
    report = analyze(images, rois)
    table = cnr_table(images, object_mask(obj.values))
    _emit(report_dict(report) | {f"cnr.{k}": table[k][0] for k in CHANNEL_NAMES})
    return 0


def cmd_run(args) -> int:
    cfg = _resolve_config(args)
    result = run_pipeline(cfg, args.out, workers=args.workers)
    _emit(report_dict(result.report) | {f"cnr.{k}": result.cnr[k][0] for k in CHANNEL_NAMES})
    return 0


def _add_config_options(p: argparse.ArgumentParser, out_required: bool = True) -> None:
    p.add_argument("--config", help="key = value config file")
    p.add_argument("--preset", choices=["noise-free", "paper-noisy"])
    p.add_argument("--seed", type=int, help="detector seed (u64)")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override one config key, e.g. detector.frames=100")
    if out_required:
        p.add_argument("--out", required=True, help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hardyghost", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("optimize", help="maximize the Hardy probability").set_defaults(func=cmd_optimize)

    p = sub.add_parser("angles", help="Hardy angles for alpha|HH> - beta|VV>")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.set_defaults(func=cmd_angles)

    p = sub.add_parser("image", help="noise-free channel intensity maps")
    _add_config_options(p)
    p.set_defaults(func=cmd_image)

    for name, func, help_ in (("acquire", cmd_acquire, "Monte Carlo ICCD acquisition"),
                              ("run", cmd_run, "full pipeline and artifact bundle")):
        p = sub.add_parser(name, help=help_)
        _add_config_options(p)
        p.add_argument("--workers", type=int, default=1)
        p.set_defaults(func=func)

    p = sub.add_parser("analyze", help="Hardy metrics from saved images")
    _add_config_options(p, out_required=False)
    p.add_argument("--images", required=True, help="directory holding image_<channel> files")
    p.set_defaults(func=cmd_analyze)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except PipelineError as exc:
        code, msg = exc.code, str(exc)
    except (FormatError, FileNotFoundError) as exc:
        code, msg = "E_IO", str(exc)
    except HardyDegenerateError as exc:
        code, msg = "E_DEGENERATE", str(exc)
    except ValueError as exc:
        code, msg = "E_INPUT", str(exc)
    sys.stderr.write(f"error code={code} message={msg!r}\n")
    return 2


if __name__ == "__main__":
    sys.exit(main())
