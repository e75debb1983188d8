"""Answer/document/supporting-fact metrics and the error taxonomy."""

import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from spansmooth.metrics import (
    ERROR_ANSWER_SPAN,
    ERROR_CORRECT,
    ERROR_MULTIHOP,
    STOPWORDS,
    MetricsReport,
    aggregate_metrics,
    answer_em,
    answer_f1,
    classify_error,
    normalize_answer,
    set_em_f1,
)

words = st.lists(
    st.sampled_from(["four", "times", "fairfax", "county", "the", "a", "red", "mill"]),
    min_size=0,
    max_size=5,
).map(" ".join)


class TestNormalizeAnswer:
    def test_articles_and_case(self):
        assert normalize_answer("The Fairfax County") == "fairfax county"

    def test_punctuation(self):
        assert normalize_answer("four times.") == "four times"

    def test_article_only_tokens_removed(self):
        assert normalize_answer("a  b") == "b"

    def test_whitespace_collapsed(self):
        assert normalize_answer("  four   times  ") == "four times"


class TestAnswerF1:
    def test_exact_match(self):
        assert answer_f1("Fairfax County", "Fairfax County") == (1.0, 1.0, 1.0)

    def test_quantifier_case(self):
        f1, precision, recall = answer_f1("four times", "four")
        assert f1 == 2 / 3
        assert precision == 1 / 2
        assert recall == 1.0

    def test_empty_prediction(self):
        assert answer_f1("", "four") == (0.0, 0.0, 0.0)

    def test_yes_no_exact_convention(self):
        assert answer_f1("yes", "yes") == (1.0, 1.0, 1.0)
        assert answer_f1("yes", "no") == (0.0, 0.0, 0.0)
        assert answer_f1("yes it is", "yes") == (0.0, 0.0, 0.0)

    def test_self_match_is_perfect(self):
        for text in ["four", "red mill", "Fairfax County, Virginia"]:
            assert answer_f1(text, text) == (1.0, 1.0, 1.0)

    @given(words, words)
    def test_f1_symmetric_value(self, a, b):
        f1_ab, p_ab, r_ab = answer_f1(a, b)
        f1_ba, p_ba, r_ba = answer_f1(b, a)
        assert f1_ab == pytest.approx(f1_ba, abs=1e-12)
        assert p_ab == pytest.approx(r_ba, abs=1e-12)
        assert r_ab == pytest.approx(p_ba, abs=1e-12)

    def test_em(self):
        assert answer_em("The four", "four") == 1.0
        assert answer_em("four times", "four") == 0.0


class TestSetEmF1:
    def test_equal_sets(self):
        assert set_em_f1({"a", "b"}, {"a", "b"}) == (1.0, 1.0)

    def test_superset(self):
        em, f1 = set_em_f1({"a", "b", "c"}, {"a", "b"})
        assert em == 0.0
        assert f1 == pytest.approx(0.8, abs=1e-12)

    def test_disjoint(self):
        assert set_em_f1({"a"}, {"b"}) == (0.0, 0.0)

    def test_empty_cases(self):
        assert set_em_f1(set(), set()) == (1.0, 1.0)
        assert set_em_f1(set(), {"a"}) == (0.0, 0.0)

    def test_em_implies_f1(self):
        for pred in [set(), {"x"}, {"x", ("t", 1)}]:
            em, f1 = set_em_f1(pred, set(pred))
            assert em == 1.0 and f1 == 1.0


class TestClassifyError:
    def test_quantifier_scenario(self):
        assert classify_error("four times", "four") == ERROR_ANSWER_SPAN

    def test_correct(self):
        assert classify_error("fairfax county", "Fairfax County") == ERROR_CORRECT

    def test_multihop(self):
        assert classify_error("arlington", "fairfax county") == ERROR_MULTIHOP

    def test_stopword_only_overlap_is_multihop(self):
        # shared tokens are all stop words, so no real overlap remains
        assert classify_error("the mill", "the county") == ERROR_MULTIHOP

    @given(words, words)
    def test_partition_is_total(self, pred, gold):
        assert classify_error(pred, gold) in (ERROR_CORRECT, ERROR_ANSWER_SPAN, ERROR_MULTIHOP)

    def test_stopword_list_is_fixed_30_words(self):
        assert len(STOPWORDS) == 30


class TestAggregateMetrics:
    def test_perfect_predictions(self):
        records = [("four", "four", {"d1", "d2"}, {"d1", "d2"}, {("d1", 0)}, {("d1", 0)})]
        report = aggregate_metrics(records)
        assert report.answer_em == 1.0
        assert report.answer_f1 == 1.0
        assert report.doc_em == 1.0
        assert report.sup_f1 == 1.0
        assert report.answer_span_errors == 0
        assert report.multihop_errors == 0

    def test_error_counting(self):
        records = [
            ("four times", "four", set(), set(), set(), set()),
            ("arlington", "fairfax", set(), set(), set(), set()),
            ("fairfax", "fairfax", set(), set(), set(), set()),
        ]
        report = aggregate_metrics(records)
        assert report.n_examples == 3
        assert report.answer_span_errors == 1
        assert report.multihop_errors == 1

    def test_json_field_names(self):
        report = aggregate_metrics([])
        payload = json.loads(report.to_json())
        assert set(payload) == {
            "answer_em",
            "answer_f1",
            "doc_em",
            "doc_f1",
            "sup_em",
            "sup_f1",
            "n_examples",
            "answer_span_errors",
            "multihop_errors",
        }

    def test_report_invariants(self):
        report = MetricsReport(0.5, 0.6, 0.5, 0.6, 0.5, 0.6, 10, 2, 1)
        assert report.answer_span_errors + report.multihop_errors <= report.n_examples
