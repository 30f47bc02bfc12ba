"""Command-line interface: ``specsub {enhance,mix,snr,spectrogram,simulate}``.

Exit status is 0 on success, 1 for usage or configuration errors and 2 for
data, format or I/O errors.
"""
import argparse
import math
import sys

import numpy as np

from .dsp import WINDOW_KINDS
from .errors import ConfigError, DomainError, SpecSubError, UsageError, WavFormatError
from .eval import (
    estimate_latency,
    global_snr_db,
    musical_noise_stats,
    simulate_musical_noise,
    spectrogram,
    write_spectrogram_csv,
    write_spectrogram_pgm,
)
from .gain import DeltaTable, GainVariant
from .pipeline import DEFAULT_TAU, PRESETS, EnhancerConfig, enhance
from .wav import WavAudio, mix_at_snr, read_wav, write_wav

NATIVE_RATE = 8000
WINDOW_CHOICES = list(WINDOW_KINDS) + ["sqrt-bh3"]
SMOOTH_NAMES = {"off": "off", "mag": "magnitude", "power": "power"}


class CliParser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit with status 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _number(kind, check, what):
    def parse(text):
        try:
            value = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected {what}, got {text!r}") from None
        if not check(value):
            raise argparse.ArgumentTypeError(f"expected {what}, got {text!r}")
        return value

    return parse


non_negative = _number(float, lambda v: v >= 0 and math.isfinite(v), "a finite number >= 0")
positive = _number(float, lambda v: v > 0 and math.isfinite(v), "a finite number > 0")
unit_interval = _number(float, lambda v: 0 <= v <= 1, "a number in [0, 1]")
power_of_two = _number(int, lambda v: v >= 8 and v & (v - 1) == 0, "a power of two >= 8")
oversampling = _number(int, lambda v: v >= 2, "an integer >= 2")
positive_int = _number(int, lambda v: v >= 1, "an integer >= 1")
snr_value = _number(float, lambda v: not math.isnan(v) and v != -math.inf, "a number of dB or 'inf'")


def _delta(text):
    if text.strip().lower() in ("off", "none"):
        return "off"
    try:
        return DeltaTable.parse(text)
    except ConfigError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _add_enhance(sub):
    p = sub.add_parser(
        "enhance",
        help="enhance a noisy WAV file",
        description="Spectral subtraction with minimum-statistics noise tracking. "
        "Options left unset take their value from the preset; defaults are shown in brackets.",
    )
    p.add_argument("--in", dest="inp", required=True, metavar="PATH", help="noisy 16-bit mono WAV")
    p.add_argument("--out", required=True, metavar="PATH", help="enhanced WAV to write")
    p.add_argument("--preset", choices=list(PRESETS), default="paper-final", help="starting configuration (default: %(default)s)")
    p.add_argument("--alpha", type=non_negative, help="fixed oversubtraction factor, disabling SNR adaptation unless --snr-alpha is also given [20 without smoothing, 2 with it]")
    p.add_argument("--lambda", dest="lam", type=unit_interval, help="spectral floor [0.05]")
    p.add_argument("--tau-ms", type=positive, help="frame smoothing time constant in ms [30 magnitude, 25 power]")
    p.add_argument("--noise-tau-ms", type=positive, help="noise estimate smoothing time constant in ms [50]")
    p.add_argument("--frame-len", type=power_of_two, help="frame length N in samples [256]")
    p.add_argument("--oversample", type=oversampling, help="frames overlapping each sample [4]")
    p.add_argument("--window", choices=WINDOW_CHOICES, help="analysis/synthesis window [sqrt-hamming-paper basic, sqrt-hanning paper-final]")
    p.add_argument("--gain", choices=[v.value for v in GainVariant], help="gain rule [floored basic, v443 paper-final]")
    p.add_argument("--smooth", choices=list(SMOOTH_NAMES), help="frame smoothing [off basic, power paper-final]")
    p.add_argument("--smooth-noise", action=argparse.BooleanOptionalAction, help="low-pass the noise estimate [on in paper-final]")
    p.add_argument("--snr-alpha", action=argparse.BooleanOptionalAction, help="SNR-adaptive alpha, 5 at or below 0 dB down to 1 at 20 dB [on in paper-final]")
    p.add_argument("--delta", type=_delta, metavar="F1:D1,F2:D2,...", help="band factors by start frequency in Hz, or 'off' [0:1,1000:2.5,2000:1.5 in paper-final]")
    p.add_argument("--residual", action=argparse.BooleanOptionalAction, help="three-frame minimum residual noise reduction [on in all-on]")
    p.add_argument("--mmse-seconds", type=positive, help="length of each of the four minimum buffers in s [2.5]")
    p.add_argument("--rate-override", action="store_true", help=f"accept input not sampled at {NATIVE_RATE} Hz, retiming frames to its rate")
    p.set_defaults(func=cmd_enhance)


def _add_mix(sub):
    p = sub.add_parser("mix", help="add noise to a clean file at a target SNR", formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--clean", required=True, metavar="PATH")
    p.add_argument("--noise", required=True, metavar="PATH", help="looped or truncated to the clean length")
    p.add_argument("--snr-db", required=True, type=snr_value, help="target SNR in dB ('inf' copies the clean file)")
    p.add_argument("--out", required=True, metavar="PATH")
    p.set_defaults(func=cmd_mix)


def _add_snr(sub):
    p = sub.add_parser("snr", help="global SNR of a test file against a clean reference", formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--clean", required=True, metavar="PATH")
    p.add_argument("--test", required=True, metavar="PATH")
    p.add_argument(
        "--latency-align",
        nargs="?",
        const="auto",
        default="0",
        metavar="SAMPLES",
        help="shift the test file back by SAMPLES, or by the cross-correlation estimate when given without a value",
    )
    p.set_defaults(func=cmd_snr)


def _add_spectrogram(sub):
    p = sub.add_parser("spectrogram", help="export a dB spectrogram as CSV or PGM", formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--in", dest="inp", required=True, metavar="PATH")
    p.add_argument("--out", required=True, metavar="PATH")
    p.add_argument("--format", choices=["csv", "pgm"], default="csv")
    p.add_argument("--frame-len", type=power_of_two, default=256)
    p.add_argument("--oversample", type=oversampling, default=4)
    p.add_argument("--window", choices=WINDOW_CHOICES, default="sqrt-hanning")
    p.set_defaults(func=cmd_spectrogram)


def _add_simulate(sub):
    p = sub.add_parser(
        "simulate",
        help="musical noise statistics of subtraction applied to Gaussian noise",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    p.add_argument("--frames", type=positive_int, default=1000)
    p.add_argument("--frame-len", type=power_of_two, default=256)
    p.add_argument("--alpha", type=non_negative, default=20.0)
    p.add_argument("--lambda", dest="lam", type=unit_interval, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, metavar="PATH", help="CSV with one row per frame")
    p.set_defaults(func=cmd_simulate)


def build_parser():
    parser = CliParser(prog="specsub", description="Spectral subtraction speech enhancement toolkit.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=CliParser)
    for add in (_add_enhance, _add_mix, _add_snr, _add_spectrogram, _add_simulate):
        add(sub)
    return parser


def config_from_args(args, sample_rate=NATIVE_RATE):
    """Preset plus explicit overrides."""
    over = {"sample_rate": float(sample_rate)}
    if args.smooth is not None:
        mode = SMOOTH_NAMES[args.smooth]
        # re-resolve the mode-dependent defaults
        over.update(smoothing=mode, tau=DEFAULT_TAU[mode], alpha=None)
    if args.alpha is not None:
        over.update(alpha=args.alpha, snr_alpha=bool(args.snr_alpha))
    elif args.snr_alpha is not None:
        over["snr_alpha"] = args.snr_alpha
    if args.tau_ms is not None:
        over["tau"] = args.tau_ms / 1000.0
    if args.noise_tau_ms is not None:
        over["noise_tau"] = args.noise_tau_ms / 1000.0
    if args.delta is not None:
        over["delta"] = None if args.delta == "off" else args.delta
    for flag, key in (
        ("lam", "floor"),
        ("frame_len", "frame_len"),
        ("oversample", "oversampling"),
        ("window", "window"),
        ("gain", "gain"),
        ("smooth_noise", "smooth_noise"),
        ("residual", "residual_reduction"),
        ("mmse_seconds", "mmse_segment_seconds"),
    ):
        value = getattr(args, flag)
        if value is not None:
            over[key] = value
    return EnhancerConfig.preset(args.preset, **over)


def cmd_enhance(args):
    audio = read_wav(args.inp)
    if audio.sample_rate != NATIVE_RATE and not args.rate_override:
        raise WavFormatError(f"{args.inp}: sampled at {audio.sample_rate} Hz; expected {NATIVE_RATE} Hz (use --rate-override)")
    cfg = config_from_args(args, audio.sample_rate)
    out = enhance(audio.samples, cfg)
    write_wav(WavAudio(out, audio.sample_rate), args.out)
    return 0


def cmd_mix(args):
    clean, noise = read_wav(args.clean), read_wav(args.noise)
    if clean.sample_rate != noise.sample_rate:
        raise WavFormatError(f"sample rates differ: {clean.sample_rate} Hz vs {noise.sample_rate} Hz")
    mixed = mix_at_snr(clean, noise, args.snr_db)
    if np.max(np.abs(mixed.samples), initial=0.0) > 1.0:
        print("specsub: warning: mixture exceeds full scale and was clipped", file=sys.stderr)
    write_wav(mixed, args.out)
    return 0


def cmd_snr(args):
    clean, test = read_wav(args.clean), read_wav(args.test)
    if args.latency_align == "auto":
        lag = estimate_latency(clean.samples, test.samples)
    else:
        try:
            lag = int(args.latency_align)
        except ValueError:
            raise UsageError(f"--latency-align: expected a sample count, got {args.latency_align!r}") from None
        if lag < 0:
            raise UsageError("--latency-align: sample count must be >= 0")
    snr = global_snr_db(clean.samples, test.samples, latency=lag)
    print(f"{snr:.6f}" if math.isfinite(snr) else "inf")
    return 0


def cmd_spectrogram(args):
    audio = read_wav(args.inp)
    spec = spectrogram(audio.samples, args.frame_len, args.frame_len // args.oversample, args.window, audio.sample_rate)
    (write_spectrogram_csv if args.format == "csv" else write_spectrogram_pgm)(spec, args.out)
    return 0


def cmd_simulate(args):
    mags = simulate_musical_noise(args.frames, args.frame_len, args.alpha, args.lam, args.seed)
    stats = musical_noise_stats(mags)
    with open(args.out, "w", newline="\n") as fh:
        fh.write("frame,kurtosis,peak_count,median\n")
        for i, k, c, m in stats.rows():
            fh.write(f"{i},{k:.6f},{c},{m:.6f}\n")
    return 0


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"specsub {args.command}: error: {exc}", file=sys.stderr)
        return 1
    except (WavFormatError, DomainError, SpecSubError, OSError) as exc:
        print(f"specsub {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
