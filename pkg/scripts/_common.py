"""Shared plumbing for the experiment scripts."""

import argparse

from logheat import __version__, io


def parser(description: str) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--out", default="out", help="directory receiving <name>/report.json")
    return p


def finish(report, out: str) -> int:
    path = io.write_report(report, out, __version__, report.inputs)
    failed = [k for k, v in report.flags.items() if not v]
    print(f"{report.name}: {'pass' if not failed else 'FAIL ' + ', '.join(failed)} -> {path}")
    return 0 if not failed else 1
