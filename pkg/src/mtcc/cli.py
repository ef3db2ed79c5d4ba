"""Command line interface.

Subcommands: enhance, template, match, evaluate.  Exit codes: 0 success,
2 empty segmentation mask, 3 empty template, 4 feature kind mismatch,
64 usage errors (bad flags, unknown kind, malformed config).
"""

import argparse
import dataclasses
import hashlib
import os
import sys

from . import evaluation, image_io, matcher
from .config import VALID_KINDS, Config, config_to_text, load_config
from .descriptor import EmptyTemplateError, build_template
from .enhancement import EmptyMaskError, enhance_pipeline, segment
from .minutiae import MinutiaeParseError, load_minutiae
from .stft import stft_analyze
from .templates import TemplateIOError, load_template, save_template

EXIT_OK = 0
EXIT_EMPTY_MASK = 2
EXIT_EMPTY_TEMPLATE = 3
EXIT_KIND_MISMATCH = 4
EXIT_USAGE = 64

_IMAGE_EXTS = (".png", ".bmp", ".pgm")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    p = _Parser(prog="mtcc", description="Minutia cylinder code toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="key=value config file")
    common.add_argument("--verbose", action="store_true")

    q = sub.add_parser("enhance", parents=[common], help="enhance an image, write maps")
    q.add_argument("image")
    q.add_argument("--out", default=".", help="output directory")
    q.add_argument("--raw-maps", action="store_true", help="also dump float32 map binaries")

    q = sub.add_parser("template", parents=[common], help="build a cylinder template")
    q.add_argument("image")
    q.add_argument("minutiae")
    q.add_argument("--kind", default="o")
    q.add_argument("--out", required=True, help="template output path")

    q = sub.add_parser("match", parents=[common], help="match two templates")
    q.add_argument("template_a")
    q.add_argument("template_b")

    q = sub.add_parser("evaluate", parents=[common], help="run the verification protocol")
    q.add_argument("root", help="dataset directory of images plus .min minutiae files")
    q.add_argument("--kind", default="all")
    q.add_argument("--out", default=".", help="output directory for csv reports")
    q.add_argument("--workers", type=int, default=None)
    return p


def _load_cfg(args) -> Config:
    cfg = Config()
    if args.config:
        try:
            cfg = load_config(args.config, base=cfg)
        except (OSError, ValueError) as exc:
            raise UsageError(f"bad config {args.config}: {exc}") from exc
    workers = getattr(args, "workers", None)
    if workers is not None:
        cfg = dataclasses.replace(cfg, workers=workers)
    return cfg


def _check_kind(kind: str, allow_all: bool = False):
    valid = VALID_KINDS + (("all",) if allow_all else ())
    if kind not in valid:
        raise UsageError(f"unknown kind {kind!r}; valid: {', '.join(valid)}")


class UsageError(ValueError):
    pass


def cmd_enhance(args) -> int:
    cfg = _load_cfg(args)
    img = image_io.load_gray(args.image)
    out_img, maps = enhance_pipeline(img, cfg.enhancement, cfg.stft)
    os.makedirs(args.out, exist_ok=True)
    stem = os.path.splitext(os.path.basename(args.image))[0]

    def path(tag, ext="pgm"):
        return os.path.join(args.out, f"{stem}.{tag}.{ext}")

    image_io.save_gray(out_img, path("enhanced"))
    image_io.save_mask(maps.mask, path("mask"))
    image_io.save_map_pgm(maps.orientation, path("orientation"))
    image_io.save_map_pgm(maps.frequency, path("frequency"))
    image_io.save_map_pgm(maps.energy, path("energy"))
    if args.raw_maps:
        image_io.save_map_binary(maps.orientation, path("orientation", "bin"))
        image_io.save_map_binary(maps.frequency, path("frequency", "bin"))
        image_io.save_map_binary(maps.energy, path("energy", "bin"))
    if args.verbose:
        print(f"wrote 5 files to {args.out}", file=sys.stderr)
    return EXIT_OK


def _build_one_template(img_path, min_path, kind, cfg: Config):
    img = image_io.load_gray(img_path)
    minutiae = load_minutiae(min_path)
    if kind == "o":
        mask = segment(img, cfg.enhancement)
        maps = None
    else:
        mask = segment(img, cfg.enhancement)
        _, maps = stft_analyze(img, mask, cfg.stft)
    return build_template(minutiae, kind, cfg.cylinder, mask, maps)


def cmd_template(args) -> int:
    _check_kind(args.kind)
    cfg = _load_cfg(args)
    template = _build_one_template(args.image, args.minutiae, args.kind, cfg)
    out_dir = os.path.dirname(os.path.abspath(args.out))
    os.makedirs(out_dir, exist_ok=True)
    save_template(template, args.out)
    if args.verbose:
        print(f"{len(template)} cylinders -> {args.out}", file=sys.stderr)
    return EXIT_OK


def cmd_match(args) -> int:
    cfg = _load_cfg(args)
    ta = load_template(args.template_a)
    tb = load_template(args.template_b)
    result = matcher.global_score(ta, tb, cfg.cylinder, cfg.relax)
    print(f"{result.score:.6f}")
    return EXIT_OK


def _discover_dataset(root):
    """Pairs of image/minutiae files named <subject>_<impression>.*"""
    entries = {}
    for name in sorted(os.listdir(root)):
        if not name.endswith(".min"):
            continue
        stem = name[: -len(".min")]
        if "_" not in stem:
            continue
        subject, _, impression = stem.rpartition("_")
        for ext in _IMAGE_EXTS:
            img = os.path.join(root, stem + ext)
            if os.path.exists(img):
                entries[(subject, impression)] = (img, os.path.join(root, name))
                break
    return entries


def _impression_sort_key(value: str):
    return (0, int(value)) if value.isdigit() else (1, value)


def _template_hash(img_path, min_path, kind, cfg: Config) -> str:
    h = hashlib.sha256()
    for p in (img_path, min_path):
        with open(p, "rb") as fh:
            h.update(fh.read())
        h.update(b"\0")
    h.update(kind.encode())
    relevant = [
        line
        for line in config_to_text(cfg).splitlines()
        if line.startswith(("cylinder.", "enhancement.", "stft."))
    ]
    h.update("\n".join(relevant).encode())
    return h.hexdigest()


def _ensure_template(key, files, kind, cfg, cache_dir, verbose):
    """Build or reuse one cached template; returns a reason string on failure."""
    subject, impression = key
    img_path, min_path = files
    tpl_path = os.path.join(cache_dir, f"{subject}_{impression}.{kind}.tpl")
    hash_path = tpl_path + ".hash"
    digest = _template_hash(img_path, min_path, kind, cfg)
    if os.path.exists(tpl_path) and os.path.exists(hash_path):
        with open(hash_path, "r", encoding="utf-8") as fh:
            if fh.read().strip() == digest:
                return None
    try:
        template = _build_one_template(img_path, min_path, kind, cfg)
    except (EmptyMaskError, EmptyTemplateError, MinutiaeParseError) as exc:
        if os.path.exists(tpl_path):
            os.remove(tpl_path)
        if os.path.exists(hash_path):
            os.remove(hash_path)
        if verbose:
            print(f"skipping {subject}_{impression} ({kind}): {exc}", file=sys.stderr)
        return str(exc)
    save_template(template, tpl_path)
    with open(hash_path, "w", encoding="utf-8") as fh:
        fh.write(digest + "\n")
    return None


def cmd_evaluate(args) -> int:
    _check_kind(args.kind, allow_all=True)
    cfg = _load_cfg(args)
    kinds = cfg.kinds if args.kind == "all" else (args.kind,)

    entries = _discover_dataset(args.root)
    if not entries:
        raise UsageError(f"no <subject>_<impression>.min files found in {args.root}")
    subjects = tuple(sorted({s for s, _ in entries}))
    impressions = tuple(
        sorted({i for _, i in entries}, key=_impression_sort_key)
    )

    cache_dir = os.path.join(args.root, cfg.cache_dir) if not os.path.isabs(cfg.cache_dir) else cfg.cache_dir
    os.makedirs(cache_dir, exist_ok=True)
    os.makedirs(args.out, exist_ok=True)

    summary_rows = []
    for kind in kinds:
        jobs = [(key, files) for key, files in sorted(entries.items())]
        if cfg.workers > 1:
            from concurrent.futures import ProcessPoolExecutor

            with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
                futures = [
                    pool.submit(_ensure_template, key, files, kind, cfg, cache_dir, args.verbose)
                    for key, files in jobs
                ]
                for f in futures:
                    f.result()
        else:
            for key, files in jobs:
                _ensure_template(key, files, kind, cfg, cache_dir, args.verbose)

        layout = evaluation.DatasetLayout(
            template_dir=cache_dir, subjects=subjects, impressions=impressions
        )
        result = evaluation.run_protocol(layout, kind, cfg.cylinder, cfg.relax)
        eer = evaluation.compute_eer(result.genuine, result.impostor)
        fmr1000 = evaluation.compute_fmr1000(result.genuine, result.impostor)
        evaluation.emit_curves(
            result.genuine,
            result.impostor,
            os.path.join(args.out, f"det_{kind}.csv"),
            os.path.join(args.out, f"roc_{kind}.csv"),
        )
        with open(os.path.join(args.out, f"skipped_{kind}.csv"), "w", encoding="utf-8") as fh:
            fh.write("subject_a,impression_a,subject_b,impression_b,reason\n")
            for (sa, ia), (sb, ib), reason in result.skipped:
                fh.write(f"{sa},{ia},{sb},{ib},\"{reason}\"\n")
        summary_rows.append(
            {
                "kind": kind,
                "eer": eer,
                "fmr1000": fmr1000,
                "genuine": int(result.genuine.size),
                "impostor": int(result.impostor.size),
                "skipped": len(result.skipped),
            }
        )
        if args.verbose:
            print(f"kind {kind}: eer={eer:.4f} fmr1000={fmr1000:.4f}", file=sys.stderr)

    evaluation.emit_summary(summary_rows, os.path.join(args.out, "summary.csv"))
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "enhance": cmd_enhance,
        "template": cmd_template,
        "match": cmd_match,
        "evaluate": cmd_evaluate,
    }
    try:
        return handlers[args.command](args)
    except UsageError as exc:
        print(f"mtcc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        if isinstance(exc, EmptyMaskError):
            print(f"mtcc: empty mask: {exc}", file=sys.stderr)
            return EXIT_EMPTY_MASK
        if isinstance(exc, EmptyTemplateError):
            print(f"mtcc: empty template: {exc}", file=sys.stderr)
            return EXIT_EMPTY_TEMPLATE
        if isinstance(exc, matcher.KindMismatchError):
            print(f"mtcc: kind mismatch: {exc}", file=sys.stderr)
            return EXIT_KIND_MISMATCH
        if isinstance(exc, (TemplateIOError, MinutiaeParseError)):
            print(f"mtcc: {exc}", file=sys.stderr)
            return 1
        raise


if __name__ == "__main__":
    sys.exit(main())
