"""Command-line driver: ``enn <command> [flags]``.

Commands write their outputs under ``--out`` with fixed file names (see the
README) and print one ``config:`` line that repeats every effective flag, so a
run can be replayed exactly.
"""

import argparse
import math
import os
import sys

import numpy as np

from . import activation as A
from .data import (PGMError, ImageGrid, dataset_to_image, image_to_dataset, load_csv, load_pgm,
                   problem, save_pgm, train_test_split)
from .modelio import ModelFileError, load_model, save_model
from .network import (ConfigError, activation_curve, baseline_spec, bump_raster,
                      decision_map, enn_spec, forward, gradient_check, init_network, param_count)
from .optim import LearningRates
from .prune import (detect_redundant_bumps, distribution_csv, layer_angle_distribution,
                    mask_report, prune_coefficients, threshold_for_fraction)
from .train import TrainConfig, inr_config, train_classification, train_inr

PROBLEMS = ("P1", "P2", "P3", "P4", "P5")
INR_KINDS = ("enn", "relu", "fourier", "siren")
# widths that keep the baselines near the ENN's parameter budget
INR_WIDTH = {"enn": 240, "relu": 256, "siren": 256, "fourier": 235}

EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_NONFINITE = 4

GLOBAL_FLAGS = ("threads",)


class UsageError(Exception):
    pass


def _positive(kind):
    def parse(text):
        v = kind(text)
        if not v > 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return v
    return parse


def _fraction(text):
    v = float(text)
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1], got {text}")
    return v


def _nonneg(text):
    v = float(text)
    if not v >= 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text}")
    return v


def build_parser():
    p = argparse.ArgumentParser(prog="enn", description="Expressive neural networks with DCT activations.")
    p.add_argument("--threads", type=_positive(int), default=None,
                   help="BLAS threads (default: $ENN_THREADS, else library default)")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("train-classify", help="train on a 2-D binary map")
    c.add_argument("--problem", choices=PROBLEMS, default="P1")
    c.add_argument("--width", type=_positive(int), default=6)
    c.add_argument("--q", type=_positive(int), default=6)
    c.add_argument("--n", type=_positive(int), default=512)
    c.add_argument("--epochs", type=_positive(int), default=50)
    c.add_argument("--batch", type=_positive(int), default=64)
    c.add_argument("--lr", type=_positive(float), default=1e-3)
    c.add_argument("--samples", type=_positive(int), default=400_000)
    c.add_argument("--test-samples", type=_positive(int), default=100_000)
    c.add_argument("--dct-bias", type=float, default=1.0)
    c.add_argument("--grid", type=_positive(int), default=128, help="raster side for maps and bumps")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out", required=True)

    r = sub.add_parser("train-inr", help="fit an image as a function of pixel coordinates")
    r.add_argument("--image", required=True)
    r.add_argument("--activation", choices=INR_KINDS, default="enn")
    r.add_argument("--layers", type=_positive(int), default=4)
    r.add_argument("--width", type=_positive(int), default=None,
                   help="hidden width (default: 240 enn, 256 relu/siren, 235 fourier)")
    r.add_argument("--q", type=_positive(int), default=6)
    r.add_argument("--n", type=_positive(int), default=512)
    r.add_argument("--omega", type=_positive(float), default=30.0)
    r.add_argument("--epochs", type=_positive(int), default=300)
    r.add_argument("--lr-linear", type=_positive(float), default=1e-3)
    r.add_argument("--lr-activation", type=_positive(float), default=1e-2)
    r.add_argument("--dct-bias", type=float, default=0.0)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--out", required=True)

    pr = sub.add_parser("prune", help="mask low-energy DCT coefficients")
    pr.add_argument("--model", required=True)
    g = pr.add_mutually_exclusive_group(required=True)
    g.add_argument("--rho", type=_nonneg)
    g.add_argument("--fraction", type=_fraction)
    pr.add_argument("--data", default=None, help="PGM image or x1,..,y CSV for MSE before/after")
    pr.add_argument("--mse", action="store_true", help="report MSE before/after (needs --data)")
    pr.add_argument("--out", required=True)

    a = sub.add_parser("analyze", help="redundancy, angle and pruning statistics of a model")
    a.add_argument("--model", required=True)
    a.add_argument("--dist-tol", type=_positive(float), default=0.05)
    a.add_argument("--angle-tol", type=_positive(float), default=10.0, help="degrees")
    a.add_argument("--bins", type=_positive(int), default=36)
    a.add_argument("--out", required=True)

    v = sub.add_parser("verify", help="gradient-check and basis-orthogonality self-test")
    v.add_argument("--nets", type=_positive(int), default=100)
    v.add_argument("--tol", type=_positive(float), default=1e-5)
    v.add_argument("--seed", type=int, default=0)
    return p


def config_line(args):
    """All effective flags, global ones first, in a form ``enn`` accepts again."""
    def flags(items):
        out = []
        for k, v in sorted(items):
            if v is None or v is False:
                continue
            flag = "--" + k.replace("_", "-")
            out.append(flag if v is True else f"{flag} {v}")
        return out

    opts = vars(args)
    head = flags((k, v) for k, v in opts.items() if k in GLOBAL_FLAGS)
    rest = flags((k, v) for k, v in opts.items() if k not in GLOBAL_FLAGS and k != "command")
    return "config: " + " ".join(head + [args.command] + rest)


def _check_finite(**values):
    bad = [k for k, v in values.items() if v is not None and not math.isfinite(v)]
    if bad:
        raise FloatingPointError(f"non-finite metrics: {', '.join(bad)}")


def _write_curve(path, z, s):
    with open(path, "w") as fh:
        fh.write("z,sigma\n")
        for a, b in zip(z, s):
            fh.write(f"{a:.17g},{b:.17g}\n")


def _to_unit(a):
    """Affinely map an array onto [-1, 1] for display (constant arrays map to 0)."""
    lo, hi = float(a.min()), float(a.max())
    if hi == lo:
        return np.zeros_like(a)
    return 2.0 * (a - lo) / (hi - lo) - 1.0


def cmd_train_classify(args, log):
    spec = problem(args.problem)
    train, test = train_test_split(spec, args.samples, args.test_samples, args.seed)
    net = init_network(enn_spec([args.width], args.q, args.n), 2, seed=args.seed, dct_bias=args.dct_bias)
    cfg = TrainConfig(epochs=args.epochs, batch_size=args.batch, rates=LearningRates(args.lr, args.lr),
                      seed=args.seed)
    metrics = train_classification(net, train, cfg, eval_data=test, log=log)
    final = metrics.final
    _check_finite(mse=final["mse"], accuracy=final["accuracy"])
    out = args.out
    save_model(net, os.path.join(out, "model.enn"))
    metrics.to_csv(os.path.join(out, "metrics.csv"))
    save_pgm(ImageGrid(decision_map(net, args.grid).astype(np.float64)), os.path.join(out, "decision_map.pgm"))
    for li in range(len(net.layers)):
        for m in range(net.layers[li].width):
            z, s = activation_curve(net, li, m)
            _write_curve(os.path.join(out, f"aaf_L{li}_N{m}.csv"), z, s)
            raster = bump_raster(net, li, m, args.grid)
            save_pgm(ImageGrid(_to_unit(raster)), os.path.join(out, f"bump_L{li}_N{m}.pgm"))
    log(f"params={param_count(net)} test_accuracy={final['accuracy']:.6f} test_mse={final['mse']:.6g}")


def _inr_spec(args):
    width = args.width or INR_WIDTH[args.activation]
    hidden = [width] * args.layers
    if args.activation == "enn":
        return enn_spec(hidden, args.q, args.n)
    if args.activation == "siren":
        return baseline_spec("sine", hidden, omega=args.omega)
    return baseline_spec(args.activation, hidden, Q=args.q)


def cmd_train_inr(args, log):
    img = load_pgm(args.image)
    bias = args.dct_bias if args.activation == "enn" else 0.0
    net = init_network(_inr_spec(args), 2, seed=args.seed, dct_bias=bias)
    cfg = inr_config(args.epochs, args.lr_linear, args.lr_activation, seed=args.seed)
    metrics = train_inr(net, img, cfg, log=log)
    mse = metrics.final["mse"]
    _check_finite(mse=mse)
    out = args.out
    save_model(net, os.path.join(out, "model.enn"))
    metrics.to_csv(os.path.join(out, "metrics.csv"))
    pred = forward(net, image_to_dataset(img).inputs, cache=False)
    save_pgm(dataset_to_image(pred, img.height, img.width), os.path.join(out, "reconstruction.pgm"))
    log(f"params={param_count(net)} mse={mse:.6g}")


def _load_data(path):
    if path.lower().endswith(".pgm"):
        return image_to_dataset(load_pgm(path))
    return load_csv(path)


def cmd_prune(args, log):
    if args.mse and args.data is None:
        raise UsageError("--mse needs --data")
    net = load_model(args.model)
    data = _load_data(args.data) if args.data is not None else None
    rho = args.rho if args.rho is not None else threshold_for_fraction(net, args.fraction)
    report = prune_coefficients(net, rho, data)
    _check_finite(mse_before=report.mse_before, mse_after=report.mse_after)
    out = args.out
    save_model(net, os.path.join(out, "pruned.enn"))
    report.to_csv(os.path.join(out, "prune_report.csv"))
    distribution_csv(report, os.path.join(out, "prune_distribution.csv"))
    msg = f"rho={rho:.6g} pruned={report.pruned}/{report.total_coeffs} ({report.fraction:.4f})"
    if report.mse_factor is not None:
        msg += f" mse {report.mse_before:.6g} -> {report.mse_after:.6g} (x{report.mse_factor:.4g})"
    log(msg)


def cmd_analyze(args, log):
    net = load_model(args.model)
    out = args.out
    red = detect_redundant_bumps(net, args.dist_tol, math.radians(args.angle_tol))
    red.to_csv(os.path.join(out, "redundancy.csv"))
    for li, layer in enumerate(net.layers):
        if layer.width < 2:
            continue
        counts, edges = layer_angle_distribution(net, li, args.bins)
        with open(os.path.join(out, f"angles_L{li}.csv"), "w") as fh:
            fh.write("lo,hi,count\n")
            for lo, hi, n in zip(edges[:-1], edges[1:], counts):
                fh.write(f"{lo:.17g},{hi:.17g},{n}\n")
    has_dct = any(isinstance(l.act, A.DctActivation) for l in net.layers)
    if has_dct:
        distribution_csv(mask_report(net), os.path.join(out, "prune_distribution.csv"))
    log(f"redundant_pairs={len(red)}")


def cmd_verify(args, log):
    rng = np.random.default_rng(args.seed)
    worst = 0.0
    for t in range(args.nets):
        hidden = [int(w) for w in rng.integers(1, 5, size=rng.integers(1, 3))]
        net = init_network(enn_spec(hidden, int(rng.integers(1, 7))), 2, seed=t,
                           dct_bias=float(rng.uniform(-1, 1)))
        x = rng.uniform(-1, 1, (4, 2))
        y = rng.choice([-1.0, 1.0], 4)
        worst = max(worst, gradient_check(net, x, y))
    grad_ok = worst < args.tol
    log(f"gradient check: {args.nets} nets, max relative error {worst:.3g} -> {'PASS' if grad_ok else 'FAIL'}")
    orth_ok = True
    for Q, N in ((6, 512), (3, 64)):
        B = A.basis_matrix(Q, N)
        err = float(np.abs(B.T @ B - 0.5 * N * np.eye(Q)).max())
        ok = err <= 1e-9 * N
        orth_ok &= ok
        log(f"orthogonality Q={Q} N={N}: max error {err:.3g} -> {'PASS' if ok else 'FAIL'}")
    if not (grad_ok and orth_ok):
        raise SelfTestFailure("self-test failed")


class SelfTestFailure(Exception):
    pass


COMMANDS = {
    "train-classify": cmd_train_classify,
    "train-inr": cmd_train_inr,
    "prune": cmd_prune,
    "analyze": cmd_analyze,
    "verify": cmd_verify,
}


def _threads(args):
    if args.threads is not None:
        return args.threads
    env = os.environ.get("ENN_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise UsageError(f"ENN_THREADS must be a positive integer, got {env!r}")
        if n < 1:
            raise UsageError(f"ENN_THREADS must be a positive integer, got {env!r}")
        return n
    return None


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    log = lambda msg: print(msg, flush=True)
    try:
        args.threads = _threads(args)
        log(config_line(args))
        if getattr(args, "out", None):
            os.makedirs(args.out, exist_ok=True)
        run = COMMANDS[args.command]
        if args.threads is None:
            run(args, log)
        else:
            from threadpoolctl import threadpool_limits
            with threadpool_limits(limits=args.threads):
                run(args, log)
    except (UsageError, ConfigError) as e:
        print(f"enn: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ModelFileError as e:
        print(f"enn: model file error: {e}", file=sys.stderr)
        return e.code
    except (PGMError, OSError) as e:
        print(f"enn: input error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except FloatingPointError as e:
        print(f"enn: {e}", file=sys.stderr)
        return EXIT_NONFINITE
    except SelfTestFailure as e:
        print(f"enn: {e}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
