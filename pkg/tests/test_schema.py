import json
from itertools import combinations

import pytest
from hypothesis import given, strategies as st

from logodm.errors import (
    CodeOverflowError,
    MalformedCodeError,
    SchemaError,
    UnknownAttributeError,
    UnknownFlagError,
)
from logodm.schema import (
    CATEGORICAL,
    CLASS_LABEL,
    CODED_FLAG,
    MISSING,
    AttributeDescriptor,
    Dataset,
    DatasetSchema,
    decode_coded_field,
    encode_coded_field,
    load_schema,
    read_csv,
    save_schema,
    validate_record,
    write_csv,
)

FLAGS = ("serious_illness", "psychological_trauma", "surgery", "accidents", "other")
HEALTH = AttributeDescriptor("health_problems", CODED_FLAG, flag_names=FLAGS)


@pytest.fixture
def schema():
    return DatasetSchema(
        (
            AttributeDescriptor("child_id", CATEGORICAL, ("c1", "c2")),
            HEALTH,
            AttributeDescriptor("receptivity", CATEGORICAL, ("low", "high")),
            AttributeDescriptor("final_state", CLASS_LABEL, ("C", "I", "S")),
        ),
        "final_state",
    )


class TestCodec:
    def test_single_flag_codes(self):
        assert decode_coded_field(10000, HEALTH) == {"serious_illness"}
        assert decode_coded_field(1000, HEALTH) == {"psychological_trauma"}
        assert decode_coded_field(100, HEALTH) == {"surgery"}
        assert decode_coded_field(10, HEALTH) == {"accidents"}
        assert decode_coded_field(1, HEALTH) == {"other"}

    def test_zero_is_empty(self):
        assert decode_coded_field(0, HEALTH) == frozenset()

    def test_composition(self):
        assert decode_coded_field(10100, HEALTH) == {"serious_illness", "surgery"}

    def test_encode_examples(self):
        assert encode_coded_field(frozenset(), HEALTH) == 0
        assert encode_coded_field({"other"}, HEALTH) == 1
        assert encode_coded_field(set(FLAGS), HEALTH) == 11111

    def test_malformed_digit_reports_position(self):
        with pytest.raises(MalformedCodeError) as info:
            decode_coded_field(10200, HEALTH)
        assert info.value.position == 2
        assert info.value.digit == 2

    def test_overflow(self):
        with pytest.raises(CodeOverflowError):
            decode_coded_field(100000, HEALTH)

    def test_unknown_flag(self):
        with pytest.raises(UnknownFlagError):
            encode_coded_field({"fracture"}, HEALTH)

    def test_round_trip_all_subsets(self):
        for r in range(len(FLAGS) + 1):
            for subset in combinations(FLAGS, r):
                assert decode_coded_field(encode_coded_field(subset, HEALTH), HEALTH) == set(subset)

    @given(st.integers(min_value=1, max_value=5).flatmap(
        lambda k: st.tuples(st.just(k), st.integers(min_value=0, max_value=10**k - 1))
    ))
    def test_decode_rejects_exactly_digits_above_one(self, case):
        k, raw = case
        spec = AttributeDescriptor("f", CODED_FLAG, flag_names=tuple(f"f{i}" for i in range(k)))
        if set(str(raw)) <= {"0", "1"}:
            assert encode_coded_field(decode_coded_field(raw, spec), spec) == raw
        else:
            with pytest.raises(MalformedCodeError):
                decode_coded_field(raw, spec)


class TestDescriptors:
    def test_duplicate_domain_rejected(self):
        with pytest.raises(SchemaError):
            AttributeDescriptor("a", CATEGORICAL, ("x", "x"))

    def test_empty_category_rejected(self):
        with pytest.raises(SchemaError):
            AttributeDescriptor("a", CATEGORICAL, ("x", ""))

    @pytest.mark.parametrize("flags", [(), tuple("abcdefghij")])
    def test_flag_count_bounds(self, flags):
        with pytest.raises(SchemaError):
            AttributeDescriptor("a", CODED_FLAG, flag_names=flags)

    def test_class_attribute_must_be_class_label(self):
        with pytest.raises(SchemaError):
            DatasetSchema((AttributeDescriptor("a", CATEGORICAL, ("x",)),), "a")

    def test_duplicate_names_rejected(self):
        a = AttributeDescriptor("a", CATEGORICAL, ("x",))
        with pytest.raises(SchemaError):
            DatasetSchema((a, a))

    def test_unknown_attribute_lookup(self, schema):
        with pytest.raises(UnknownAttributeError):
            schema.position("nope")

    def test_json_round_trip(self, schema, tmp_path):
        path = tmp_path / "schema.json"
        save_schema(schema, path)
        doc = json.loads(path.read_text())
        assert set(doc) == {"attributes", "class_attribute"}
        assert doc["attributes"][1] == {
            "name": "health_problems", "kind": "coded-flag", "flag_names": list(FLAGS)
        }
        assert load_schema(path) == schema


class TestValidation:
    def test_valid_record(self, schema):
        assert validate_record(("c1", frozenset({"surgery"}), "low", "C"), schema) == []

    def test_out_of_domain(self, schema):
        bad = validate_record(("c1", frozenset(), "medium", "C"), schema)
        assert [v.attribute for v in bad] == ["receptivity"]

    def test_missing_is_admissible(self, schema):
        assert validate_record(("c1", MISSING, MISSING, MISSING), schema) == []

    def test_unknown_flag_in_set(self, schema):
        bad = validate_record(("c1", frozenset({"x"}), "low", "C"), schema)
        assert [v.attribute for v in bad] == ["health_problems"]

    def test_wrong_length(self, schema):
        assert validate_record(("c1",), schema)

    def test_order_independent(self, schema):
        recs = [("c1", frozenset(), "low", "C"), ("c2", frozenset(), "mid", "S")]
        forward = [validate_record(r, schema) for r in recs]
        backward = [validate_record(r, schema) for r in reversed(recs)]
        assert forward == backward[::-1]

    def test_dataset_rejects_invalid(self, schema):
        with pytest.raises(SchemaError):
            Dataset(schema, [("c3", frozenset(), "low", "C")])


class TestCSV:
    def test_round_trip_keeps_missing_and_empty_flags_apart(self, schema, tmp_path):
        ds = Dataset(schema, [
            ("c1", frozenset(), "low", "C"),
            ("c2", MISSING, "high", MISSING),
            ("c1", frozenset({"serious_illness", "surgery"}), MISSING, "I"),
        ])
        path = tmp_path / "data.csv"
        write_csv(ds, path)
        text = path.read_text()
        assert text.splitlines()[1:] == ["c1,0,low,C", "c2,,high,", "c1,10100,,I"]
        assert read_csv(path, schema) == ds

    def test_header_must_match(self, schema, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text("receptivity,child_id,health_problems,final_state\n")
        with pytest.raises(SchemaError, match="header"):
            read_csv(path, schema)

    def test_malformed_code_in_file(self, schema, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text("child_id,health_problems,receptivity,final_state\nc1,120,low,C\n")
        with pytest.raises(SchemaError, match=":2"):
            read_csv(path, schema)

    def test_codes_mark_missing(self, schema):
        ds = Dataset(schema, [("c1", MISSING, "high", "S"), ("c2", MISSING, MISSING, "C")])
        assert ds.codes("receptivity").tolist() == [1, -1]
        with pytest.raises(SchemaError):
            ds.codes("health_problems")
