"""Runs the CLI on a tiny synthetic dataset and validates every JSON artifact
against docs/schemas."""

import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema

CLI = str(pathlib.Path(sys.argv[1]).resolve())
SCHEMAS = pathlib.Path(sys.argv[2])
TINY = ["--set", "eeg_encoder.temporal_kernel=5", "--set", "eeg_encoder.features=4",
        "--set", "image_source.output_dim=16", "--set", "eval.n_way=3", "--set", "eval.repeats=2",
        "--batch-size", "4", "--epochs", "2"]


def schema(name):
    s = json.loads((SCHEMAS / name).read_text())
    jsonschema.Draft202012Validator.check_schema(s)
    return jsonschema.Draft202012Validator(s)


def main():
    summary = schema("cli_summary.schema.json")
    failures = 0

    def check(validator, doc, label):
        nonlocal failures
        errors = sorted(validator.iter_errors(doc), key=str)
        for e in errors:
            print(f"{label}: {e.message}")
        failures += bool(errors)

    with tempfile.TemporaryDirectory() as tmp:
        d = pathlib.Path(tmp)

        def cli(*args, expect=0):
            p = subprocess.run([CLI, "--json", *args], capture_output=True, text=True, cwd=d)
            if p.returncode != expect:
                raise SystemExit(f"{args[0]}: exit {p.returncode}, expected {expect}\n{p.stderr}")
            doc = json.loads(p.stdout)
            check(summary, doc, f"summary[{args[0]}]")
            return doc

        cli("synth", "--out", "data", "--concepts", "4", "--images-per-concept", "2", "--test-concepts", "3",
            "--channels", "4", "--samples", "24", "--latent-dim", "4", "--image-size", "8", "--views", "2",
            "--raw-repetitions", "2")
        cli("train", "--data", "data/manifest.json", "--out", "run", *TINY)
        cli("eval", "--data", "data/manifest.json", "--checkpoint", "run/model.ckpt", "--out", "report")
        cli("sweep", "--data", "data/manifest.json", "--out", "sweep", "--axis", "loss_variant", "--values", "asym",
            "plain", "--seeds", "1", *TINY)
        cli("preprocess", "--input", "data/raw.nbta", "--out", "clean.nbta", "--repetitions", "2")
        cli("augment", "--input", "data/images.nbtf", "--out", "views.nbtf", "--png-dir", "png")
        cli("gradcheck")
        cli("train", "--data", "missing.json", "--out", "x", expect=3)
        cli("preprocess", "--input", "data/raw.nbta", "--out", "bad.nbta", "--repetitions", "3", expect=1)

        check(schema("manifest.schema.json"), json.loads((d / "data/manifest.json").read_text()), "manifest")
        check(schema("config.schema.json"), json.loads((d / "run/config.json").read_text()), "config")
        check(schema("report.schema.json"), json.loads((d / "report.json").read_text()), "report")
        check(schema("extraction_manifest.schema.json"), json.loads((d / "png/extract.json").read_text()),
              "extract")

        header = (d / "run/runlog.csv").read_text().splitlines()[0]
        if header != "epoch,loss,tau,top1,top5,seconds":
            print(f"runlog header: {header}")
            failures += 1

    print("schemas: FAIL" if failures else "schemas: ok")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
