import pytest

from tabrepair import DataError, Relation, load_csv, save_csv
from tabrepair.relation import read_csv, to_csv_text
import io


class TestLoad:
    def test_null_token_becomes_missing(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("a,b\nx,\n", encoding="utf-8")
        relation = load_csv(path)
        assert relation.rows == (("x", None),)

    def test_custom_null_token(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("a,b\nx,NA\n", encoding="utf-8")
        relation = load_csv(path, null_token="NA")
        assert relation.rows == (("x", None),)

    def test_missing_header(self):
        with pytest.raises(DataError):
            read_csv(io.StringIO(""))

    def test_duplicate_header(self):
        with pytest.raises(DataError):
            read_csv(io.StringIO("a,a\n1,2\n"))

    def test_ragged_row(self):
        with pytest.raises(DataError):
            read_csv(io.StringIO("a,b\n1\n"))

    def test_quoted_cells(self):
        relation = read_csv(io.StringIO('a,b\n"x,1","say ""hi"""\n'))
        assert relation.rows == (("x,1", 'say "hi"'),)


class TestRoundTrip:
    def test_save_load_identity(self, tmp_path):
        relation = Relation(
            ("a", "b"), (("x", None), ("comma,value", 'quote"'), ("", "y"))
        )
        path = tmp_path / "out.csv"
        save_csv(relation, path)
        again = load_csv(path)
        # The empty string is the default null token, so it reloads as
        # missing; everything else is exact.
        assert again.rows == ((("x", None)), (("comma,value", 'quote"')), ((None, "y")))

    def test_lf_line_endings(self):
        text = to_csv_text(Relation(("a",), (("x",),)))
        assert text == "a\nx\n"
        assert "\r" not in text


class TestRelation:
    def test_duplicate_attributes_rejected(self):
        with pytest.raises(DataError):
            Relation(("a", "a"), ())

    def test_row_width_checked(self):
        with pytest.raises(DataError):
            Relation(("a", "b"), (("x",),))

    def test_column_and_mapping(self):
        relation = Relation(("a", "b"), (("x", "y"), ("p", "q")))
        assert relation.column("b") == ("y", "q")
        assert relation.row_mapping(1) == {"a": "p", "b": "q"}
