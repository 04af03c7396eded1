import json

import pytest

from noethkit.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, json.loads(out)


class TestEval:
    def test_member_word_pattern(self, capsys):
        code, doc = run_cli(
            capsys, "eval", "member", "(word a b b)",
            "(wordopen (up a) (up b))", "--space", "(words (fin a b))")
        assert code == 0 and doc["result"] is True

    def test_member_closed_product(self, capsys):
        code, doc = run_cli(
            capsys, "eval", "member", "(ordword (a 2))",
            "(ordprod (pow (down a) w))", "--space", "(ordwords (fin a b) w*2)")
        assert code == 0 and doc["result"] is True

    def test_includes_with_witness(self, capsys):
        code, doc = run_cli(
            capsys, "eval", "includes", "(wordopen (up a))",
            "(wordopen (up b))", "--space", "(words (fin a b))")
        assert code == 0 and doc["result"] is False
        assert doc["witness"] == "(word a)"

    def test_leq(self, capsys):
        code, doc = run_cli(capsys, "eval", "leq", "(word a b)", "(word a a b)",
                            "--space", "(words (fin a b))")
        assert code == 0 and doc["result"] is True

    def test_closure(self, capsys):
        code, doc = run_cli(capsys, "eval", "closure", "(word a b)",
                            "--space", "(words (fin a b))")
        assert code == 0
        assert doc["result"] == "(ordprod (amo (down a)) (amo (down b)))"

    def test_extent_export(self, capsys):
        code, doc = run_cli(capsys, "eval", "extent", "(wordopen (up a))",
                            "--space", "(words (fin a b))", "--bound", "1")
        assert code == 0
        assert doc["points"] == ["(word a)"] and doc["count"] == 1

    def test_syntax_error_exit_code(self, capsys):
        code, doc = run_cli(capsys, "eval", "member", "(word a", "(whole)",
                            "--space", "(words (fin a b))")
        assert code == 2 and doc["kind"] == "syntax"

    def test_domain_error_exit_code(self, capsys):
        code, doc = run_cli(capsys, "eval", "closure", "(word a c)",
                            "--space", "(words (fin a b))")
        assert code == 1 and doc["kind"] == "domain"


class TestIterate:
    def test_div_three_steps(self, capsys):
        code, doc = run_cli(capsys, "iterate", "div", "--steps", "3",
                            "--bound", "10")
        assert code == 0
        assert len(doc["stages"]) == 4
        last = doc["stages"][3]
        exprs = {g["expr"] for g in last["generators"]}
        assert "(up 1)" in exprs and "(up 2)" in exprs and "(up 3)" in exprs
        depths = {g["expr"]: g["depth"] for g in last["generators"]}
        assert depths["(up 3)"] == "3"

    def test_deterministic_output(self, capsys):
        _, doc1 = run_cli(capsys, "iterate", "subword", "--steps", "2",
                          "--bound", "4")
        _, doc2 = run_cli(capsys, "iterate", "subword", "--steps", "2",
                          "--bound", "4")
        assert doc1 == doc2

    def test_dot_output(self, capsys, tmp_path):
        dot_path = tmp_path / "lattice.dot"
        code, doc = run_cli(capsys, "iterate", "subword", "--steps", "2",
                            "--bound", "5", "--dot-out", str(dot_path))
        assert code == 0
        text = dot_path.read_text()
        assert text.startswith("digraph")
        assert text.count("->") == 12

    def test_json_out_round_trips(self, capsys, tmp_path):
        json_path = tmp_path / "stages.json"
        code, doc = run_cli(capsys, "iterate", "div", "--steps", "2",
                            "--bound", "8", "--json-out", str(json_path))
        assert code == 0
        stored = json.loads(json_path.read_text())
        assert stored["stages"] == doc["stages"]


class TestBadChain:
    def test_prefix_rule_chain(self, capsys):
        code, doc = run_cli(capsys, "badchain", "baditer", "--length", "5",
                            "--bound", "6")
        assert code == 0
        picks = doc["chain"]["picks"]
        assert len(picks) == 5
        assert picks[0] == "(prefix (base b) (whole))"
        assert picks[1] == "(prefix (base a) (prefix (base b) (whole)))"

    def test_subword_rule_none(self, capsys):
        code, doc = run_cli(capsys, "badchain", "subword", "--length", "5",
                            "--bound", "6")
        assert code == 0 and doc["chain"] is None


class TestGood:
    def test_sequence_file(self, capsys, tmp_path):
        seq = tmp_path / "seq.txt"
        seq.write_text("(up (word a b))\n(up (word b))\n(up (word a b a))\n")
        code, doc = run_cli(capsys, "good", str(seq),
                            "--space", "(words (fin a b))", "--bound", "6")
        assert code == 0 and doc["good_index"] == 2


class TestCover:
    def test_vas_cover(self, capsys, tmp_path):
        system = tmp_path / "net.json"
        system.write_text(json.dumps({
            "family": "vas",
            "places": 2,
            "rules": [{"guard": [1, 0], "delta": [-1, 1]}],
            "init": [1, 0],
            "target": [[0, 1]],
        }))
        code, doc = run_cli(capsys, "cover", str(system))
        assert code == 0
        assert doc["verdict"] == "coverable"
        assert doc["witness_length"] == 1

    def test_missing_file_is_domain_error(self, capsys):
        code, doc = run_cli(capsys, "cover", "/nonexistent/net.json")
        assert code == 1


class TestDivisibility:
    def test_words_coincidence(self, capsys):
        code, doc = run_cli(
            capsys, "divisibility", "(mu (sum unit (prod (fin a b) id)))",
            "--depth", "4", "--check", "coincidence")
        assert code == 0
        assert doc["equal"] is True and doc["bound"] == 3

    def test_words_stability(self, capsys):
        code, doc = run_cli(
            capsys, "divisibility", "(mu (sum unit (prod (fin a b) id)))",
            "--depth", "4", "--check", "stability")
        assert code == 0 and doc["stable"] is True

    def test_trees_embedding(self, capsys):
        code, doc = run_cli(
            capsys, "divisibility", "(mu (prod (fin a b) (list id)))",
            "--depth", "3", "--check", "embedding", "--size-cap", "6")
        assert code == 0 and doc["equal"] is True
