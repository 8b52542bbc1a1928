"""
Instance files and the command line
===================================

Write an instance file, read it back bit for bit, and drive the same
workflow through the CLI.
"""

# %%
import io
import json
from pathlib import Path

from exactqcqp import fileio
from exactqcqp import instances as inst
from exactqcqp.cli import main

out = Path(__file__).parent / "out"
out.mkdir(exist_ok=True)

# %%
cset, objectives = inst.example41()
doc = fileio.InstanceFile.from_set(cset, objectives=objectives, metadata={"generator": "example41"})
path = out / "example41.json"
fileio.save(doc, path)
print("round trip identical:", fileio.load(path) == doc)
print(path.read_text()[:200], "...")


# %%
def cli(*argv):
    buf = io.StringIO()
    code = main([str(a) for a in argv], out=buf)
    return code, buf.getvalue()


code, text = cli("solve", path, "--objective", "q1")
print(text)
code, text = cli("--json", "solve", path, "--objective", "q6")
print("exit", code, "case", json.loads(text)["extraction"]["case_path"])

# %%
cli("generate", "strip", "--out", out / "strip.json")
print("strip exit code:", cli("solve", out / "strip.json")[0], "(4 = unbounded)")
print(cli("verify", path, "--condition", "D", "--condition", "Cprime")[1])
