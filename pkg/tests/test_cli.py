import json
import math

import numpy as np
import pytest

from compnorm.cli import main
from compnorm.spec_io import SelfMapError, SymbolSpecError, dumps_symbol, loads_symbol, parse_symbol
from compnorm.symbols import Blaschke, Compose, Mobius, Polynomial, Product, evaluate, make_blaschke, make_mobius


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return p


IDENTITY = {"type": "identity"}
DEG2 = {"type": "blaschke", "zeros": [[0, 0], [0.5, 0]], "rotation": [1, 0]}
DEG3 = {"type": "blaschke", "zeros": [[0, 0], [0.4, 0.1], [-0.3, 0.5]], "rotation": [0, 1]}


class TestParse:
    def test_mobius(self, tmp_path):
        sym = parse_symbol(write(tmp_path, "m.json", {"type": "mobius", "alpha": [0.5, 0.0]}))
        assert sym == Mobius(0.5)

    def test_blaschke(self, tmp_path):
        sym = parse_symbol(write(tmp_path, "b.json", DEG2))
        assert isinstance(sym, Blaschke) and sym.degree == 2

    def test_self_map_rejection_is_distinct(self, tmp_path):
        p = write(tmp_path, "p.json", {"type": "poly", "coeffs": [[0, 0], [2, 0]]})
        with pytest.raises(SelfMapError) as info:
            parse_symbol(p)
        assert not isinstance(info.value, SymbolSpecError)

    def test_syntax_error_position(self):
        with pytest.raises(SymbolSpecError) as info:
            loads_symbol('{\n  "type": "mobius",\n  "alpha": [0.5 0]\n}')
        assert (info.value.line, info.value.column) == (3, 17)

    def test_schema_error_position(self):
        with pytest.raises(SymbolSpecError) as info:
            loads_symbol('{"type": "compose",\n "outer": {"type": "identity"},\n "inner": {"type": "bogus"}}')
        assert info.value.line == 3 and "unknown node type" in str(info.value)

    @pytest.mark.parametrize(
        "doc",
        [
            {"type": "mobius"},
            {"type": "mobius", "alpha": [0.5, 0], "beta": 1},
            {"type": "mobius", "alpha": [1.5, 0]},
            {"type": "poly", "coeffs": []},
            {"type": "const", "c": "x"},
            [1, 2],
        ],
    )
    def test_schema_violations(self, doc):
        with pytest.raises(SymbolSpecError):
            loads_symbol(json.dumps(doc))

    def test_round_trip(self):
        sym = Compose(
            make_mobius(0.3 - 0.1j),
            Product(make_blaschke([0.2, -0.5j], np.exp(0.4j)), Polynomial((0.1, 0.2 + 0.1j, 0.3))),
        )
        again = loads_symbol(dumps_symbol(sym))
        g = np.random.default_rng(5)
        z = 0.95 * np.sqrt(g.random(100)) * np.exp(2j * np.pi * g.random(100))
        np.testing.assert_array_equal(evaluate(again, z), evaluate(sym, z))
        assert dumps_symbol(again) == dumps_symbol(sym)


def read_csv(path):
    lines = path.read_text().splitlines()
    header = lines[1].split(",")
    rows = [dict(zip(header, ln.split(","))) for ln in lines[2:]]
    return lines[0], header, rows


class TestRun:
    def test_essnorm_identity(self, tmp_path, capsys):
        sym, out = write(tmp_path, "id.json", IDENTITY), tmp_path / "e.csv"
        code = main(["essnorm", "--symbol", str(sym), "--out", str(out), "--schedule-depth", "5", "--angles", "4"])
        assert code == 0
        schema, header, rows = read_csv(out)
        assert schema == "#schema=essnorm/v1"
        assert header[:3] == ["s", "tail_sup", "error"]
        assert len(rows) == 3
        assert "proxy=" + rows[-1]["tail_sup"] in capsys.readouterr().out

    def test_blaschke_check(self, tmp_path):
        sym, out = write(tmp_path, "b.json", DEG2), tmp_path / "c.csv"
        assert main(["blaschke-check", "--symbol", str(sym), "--out", str(out), "--angles", "3"]) == 0
        _, header, rows = read_csv(out)
        assert header == ["alpha_re", "alpha_im", "discrepancy"]
        assert len(rows) == 9 and all(float(r["discrepancy"]) <= 1e-3 for r in rows)

    def test_valency_map_degree_three(self, tmp_path):
        sym, out = write(tmp_path, "b3.json", DEG3), tmp_path / "v.csv"
        assert main(["valency-map", "--symbol", str(sym), "--out", str(out), "--grid", "50"]) == 0
        _, _, rows = read_csv(out)
        assert len(rows) > 1800
        assert {r["count"] for r in rows} == {"3"}

    def test_malformed_spec_exit_code(self, tmp_path, capsys):
        sym = write(tmp_path, "bad.json", '{"type": "mobius",\n "alpha": [0.5, }')
        assert main(["kappa", "--symbol", str(sym), "--out", str(tmp_path / "k.csv")]) == 2
        assert "line 2, column" in capsys.readouterr().err

    def test_self_map_exit_code(self, tmp_path):
        sym = write(tmp_path, "p.json", {"type": "poly", "coeffs": [[0, 0], [2, 0]]})
        assert main(["kappa", "--symbol", str(sym), "--out", str(tmp_path / "k.csv")]) == 2

    def test_missing_file(self, tmp_path):
        assert main(["kappa", "--symbol", str(tmp_path / "nope.json"), "--out", str(tmp_path / "k.csv")]) == 2

    def test_nonconvergence_exit_code(self, tmp_path):
        sym, out = write(tmp_path, "id.json", IDENTITY), tmp_path / "k.csv"
        argv = ["kappa", "--symbol", str(sym), "--out", str(out), "--alpha", "0.999,0", "--rel-tol", "1e-13", "--max-panels", "64"]
        assert main(argv) == 3
        _, _, rows = read_csv(out)
        assert rows[0]["converged"] == "false"

    def test_byte_identical(self, tmp_path):
        sym = write(tmp_path, "b.json", DEG2)
        outs = []
        for k in range(2):
            out = tmp_path / f"mc{k}.csv"
            argv = ["mc-check", "--symbol", str(sym), "--out", str(out), "--seed", "9", "--samples", "20000"]
            assert main(argv) == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_json_mirrors_csv(self, tmp_path):
        sym = write(tmp_path, "b.json", DEG2)
        csv_out, json_out = tmp_path / "k.csv", tmp_path / "k.json"
        base = ["kappa", "--symbol", str(sym), "--alpha", "0.3,-0.4"]
        assert main(base + ["--out", str(csv_out)]) == 0
        assert main(base + ["--out", str(json_out), "--format", "json"]) == 0
        _, header, rows = read_csv(csv_out)
        doc = json.loads(json_out.read_text())
        assert doc["schema"] == "kappa/v1" and doc["columns"] == header
        assert float(rows[0]["kappa"]) == doc["rows"][0]["kappa"]

    def test_seventeen_digits(self, tmp_path):
        sym, out = write(tmp_path, "id.json", IDENTITY), tmp_path / "k.csv"
        assert main(["kappa", "--symbol", str(sym), "--out", str(out)]) == 0
        _, _, rows = read_csv(out)
        v = float(rows[0]["kappa"])
        assert format(v, ".17g") == rows[0]["kappa"] and math.isfinite(v)

    @pytest.mark.parametrize("cmd", ["sweep", "carleson", "lemma1", "ntprofile"])
    def test_other_commands(self, tmp_path, cmd):
        doc = {"type": "poly", "coeffs": [[0, 0], [0, 0], [1, 0]]}
        sym, out = write(tmp_path, "s.json", doc), tmp_path / "o.csv"
        assert main([cmd, "--symbol", str(sym), "--out", str(out), "--schedule-depth", "3", "--angles", "4"]) == 0
        assert out.read_text().startswith(f"#schema={cmd}/v1\n")
