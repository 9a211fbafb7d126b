"""Run every problem file through the CLI and print a one-line digest per task."""

import argparse
import glob
import json
import os
import subprocess
import sys

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def digest(rep):
    bits = []
    for v in rep["verdicts"]:
        if "bound" in v:
            bits.append("%s bound=%s" % (v["flavor"], v["bound"]))
        elif "verdict" in v:
            bits.append("%s=%s" % (v["kind"], v["verdict"]))
        elif "pass" in v:
            bits.append("%s=%s" % (v["kind"], "pass" if v["pass"] else "fail"))
    if rep.get("solution"):
        bits.append("y=" + rep["solution"]["series"])
    if rep.get("obstruction"):
        bits.append("obstruction=" + rep["obstruction"]["tag"])
    return ", ".join(bits)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("files", nargs="*", default=sorted(glob.glob(os.path.join(ROOT, "problems", "*.germ"))))
    ap.add_argument("--trunc", type=int)
    args = ap.parse_args()
    for path in args.files:
        cmd = [sys.executable, "-m", "germsolve.cli", "run", path]
        if args.trunc:
            cmd += ["--trunc", str(args.trunc)]
        out = subprocess.run(cmd, capture_output=True, text=True)
        doc = json.loads(out.stdout)
        name = os.path.basename(path)
        if doc.get("error"):
            print("%-24s exit %d  error: %s" % (name, out.returncode, doc["error"]["message"]))
            continue
        for rep in doc["reports"]:
            print("%-24s %-18s %s" % (name, rep["task"]["label"], digest(rep)))


if __name__ == "__main__":
    main()
