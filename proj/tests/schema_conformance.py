"""Validates CLI outputs and service responses against schemas/.

usage: schema_conformance.py <valleyfinder executable> <schemas dir>
"""

import json
import pathlib
import socket
import subprocess
import sys
import tempfile
import time
import urllib.error
import urllib.request

import jsonschema
from referencing import Registry, Resource

EXE = pathlib.Path(sys.argv[1]).resolve()
SCHEMAS = pathlib.Path(sys.argv[2]).resolve()

resources = []
for path in SCHEMAS.glob("*.schema.json"):
    doc = json.loads(path.read_text())
    resources.append((doc["$id"], Resource.from_contents(doc)))
registry = Registry().with_resources(resources)
failures = []
checked = 0


def check(schema_name, instance, where):
    global checked
    schema = json.loads((SCHEMAS / f"{schema_name}.schema.json").read_text())
    validator = jsonschema.Draft202012Validator(schema, registry=registry)
    errors = list(validator.iter_errors(instance))
    checked += 1
    for e in errors[:3]:
        failures.append(f"{where}: {schema_name}: {e.message} at {list(e.absolute_path)}")


def run(*args, cwd):
    proc = subprocess.run([str(EXE), *args], cwd=cwd, capture_output=True, text=True)
    if proc.returncode != 0:
        failures.append(f"{' '.join(args)} exited {proc.returncode}: {proc.stderr.strip()}")
    return proc


def load(path):
    return json.loads(path.read_text())


def lines(path):
    return [json.loads(line) for line in path.read_text().splitlines() if line]


def request(port, method, target, body=None):
    data = None if body is None else json.dumps(body).encode()
    req = urllib.request.Request(f"http://127.0.0.1:{port}{target}", data=data, method=method,
                                 headers={"Content-Type": "application/json"})
    try:
        with urllib.request.urlopen(req, timeout=120) as res:
            return res.status, json.loads(res.read())
    except urllib.error.HTTPError as e:
        return e.code, json.loads(e.read())


def free_port():
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def main():
    with tempfile.TemporaryDirectory() as tmp:
        work = pathlib.Path(tmp)
        spec = {
            "components": [{"mu": 6.7, "sigma": 2.9, "lambda": 0.7},
                           {"mu": 16.8, "sigma": 2.2, "lambda": 0.3}],
            "n_users": 300,
            "events_per_user": {"min": 2, "max": 60},
            "start_s": 1400000000,
            "seed": 5,
        }
        check("synth_spec", spec, "spec.json")
        (work / "spec.json").write_text(json.dumps(spec))
        run("simulate", "--input", "spec.json", "--out", ".", cwd=work)
        with open(work / "events.csv", "a") as f:
            for i in range(600):
                f.write(f"bot,{1400000000 + 1080 * i}\n")

        config = {
            "input": {"path": "events.csv", "format": "csv",
                      "columns": {"user_field": "user_id", "timestamp_field": "timestamp",
                                  "timestamp_format": "EPOCH_SECONDS"}},
            "filters": {"min_delta_s": 0},
            "fits": [{"k": 2, "restarts": 2}, {"k": 3, "restarts": 2}],
            "threshold_s": 3600,
            "output_dir": ".",
            "bin_width": 0.25,
        }
        check("pipeline_config", config, "pipeline.json")
        (work / "pipeline.json").write_text(json.dumps(config))
        for command in ("deltas", "fit", "threshold", "sessionize"):
            run(command, "--config", "pipeline.json", cwd=work)

        for i, sample in enumerate(lines(work / "samples.jsonl")):
            check("sample", sample, f"samples.jsonl:{i + 1}")
        spikes = load(work / "spikes.json")
        if not spikes:
            failures.append("spikes.json: expected the embedded 1080 s spike")
        check("spike_reports", spikes, "spikes.json")
        check("fits_document", load(work / "fits.json"), "fits.json")
        for entry in (e for e in load(work / "fits.json")["fits"] if "fit" in e):
            check("mixture_fit", entry["fit"], f"fits.json k={entry['k']}")
        check("histogram", load(work / "histogram.json"), "histogram.json")
        check("threshold_result", load(work / "threshold.json"), "threshold.json")
        check("valley_report", load(work / "valley.json"), "valley.json")
        for i, session in enumerate(lines(work / "sessions.jsonl")):
            check("session", session, f"sessions.jsonl:{i + 1}")
        check("session_summary", load(work / "session_summary.json")["summary"],
              "session_summary.json")

        port = free_port()
        server = subprocess.Popen([str(EXE), "serve", "--addr", f"127.0.0.1:{port}",
                                   "--workdir", str(work)],
                                  stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL)
        try:
            for _ in range(100):
                try:
                    request(port, "GET", "/api/spikes")
                    break
                except OSError:
                    time.sleep(0.1)
            status, body = request(port, "GET", "/api/histogram?bin_width=0.5")
            check("histogram", body, f"GET /api/histogram ({status})")
            status, body = request(port, "POST", "/api/fit", {"k": 2, "seed": 3, "restarts": 2})
            check("fit_response", body, f"POST /api/fit ({status})")
            status, threshold = request(port, "GET", f"/api/threshold?fit_id={body['fit_id']}")
            check("threshold_result", threshold, f"GET /api/threshold ({status})")
            status, body = request(port, "GET", "/api/spikes")
            check("spike_reports", body, f"GET /api/spikes ({status})")
            status, body = request(port, "POST", "/api/filters", {"exclude_users": ["bot"]})
            check("filters_response", body, f"POST /api/filters ({status})")
            status, body = request(port, "POST", "/api/fit", {"k": 7})
            if status != 400:
                failures.append(f"POST /api/fit k=7 returned {status}")
            check("error", body, "POST /api/fit k=7")
            status, body = request(port, "GET", "/api/threshold?fit_id=0000000000000000")
            if status != 404:
                failures.append(f"unknown fit_id returned {status}")
            check("error", body, "GET /api/threshold unknown id")
        finally:
            server.terminate()
            server.wait(timeout=10)

    for failure in failures:
        print("FAIL", failure)
    print(f"{checked} documents checked, {len(failures)} failure(s)")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
