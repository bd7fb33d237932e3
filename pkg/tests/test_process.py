# -*- coding: utf-8 -*-
# vim: sw=4:ts=4:expandtab
"""
tests.test_process
~~~~~~~~~~~~~~~~~~

Provides result summary unit tests.
"""
import nose.tools as nt

from erdf import process as pr, stats

RESULTS = [
    {"variant": "full", "metric": "kl", "seed": 0, "value": 0.10},
    {"variant": "full", "metric": "kl", "seed": 1, "value": 0.14},
    {"variant": "df", "metric": "kl", "seed": 0, "value": 0.20},
    {"variant": "df", "metric": "kl", "seed": 1, "value": 0.22},
    {"variant": "full", "metric": "cosine", "seed": 0, "value": 0.95},
    {"variant": "full", "metric": "cosine", "seed": 1, "value": 0.93},
    {"variant": "df", "metric": "cosine", "seed": 0, "value": 0.90},
    {"variant": "df", "metric": "cosine", "seed": 1, "value": 0.92},
]


def setup_module():
    """site initialization"""
    global initialized
    initialized = True
    print("Site Module Setup\n")


class Test:
    def test_group(self):
        grouped = dict(pr.group(RESULTS, "variant"))
        nt.assert_equal(["df", "full"], sorted(grouped))
        nt.assert_equal(4, len(grouped["full"]))

    def test_aggregate(self):
        kl = [r for r in RESULTS if r["metric"] == "kl"]
        record = pr.aggregate(kl, "value", max)
        nt.assert_equal(0.22, record["value"])
        nt.assert_equal("full", record["variant"])

    def test_summarize(self):
        summary = pr.summarize(RESULTS, ["metric", "variant"])
        keys = [(r["metric"], r["variant"]) for r in summary]
        expected = [("kl", "full"), ("kl", "df"), ("cosine", "full"), ("cosine", "df")]
        nt.assert_equal(expected, keys)
        nt.assert_almost_equal(0.12, summary[0]["mean"])
        nt.assert_almost_equal(0.02, summary[0]["std"])
        nt.assert_equal(2, summary[0]["count"])

    def test_ranks(self):
        summary = pr.summarize(RESULTS, ["metric", "variant"])
        ranked = pr.add_ranks(summary)
        ranks = {(r["metric"], r["variant"]): r["rank"] for r in ranked}
        nt.assert_equal(1.0, ranks[("kl", "full")])
        nt.assert_equal(2.0, ranks[("kl", "df")])
        nt.assert_equal(1.0, ranks[("cosine", "full")])
        nt.assert_equal({"full": 1.0, "df": 2.0}, pr.average_ranks(ranked))

    def test_rank_ties(self):
        nt.assert_equal([2.0, 2.0, 2.0], pr.rank([0.1, 0.1, 0.1]))
        nt.assert_equal([1.0, 2.5, 2.5], pr.rank([0.1, 0.3, 0.3]))
        nt.assert_equal([3.0, 1.5, 1.5], pr.rank([0.1, 0.3, 0.3], True))


class TestStats:
    def test_mean(self):
        nt.assert_equal(2.8, stats.mean([1, 2, 3, 4, 4]))
        nt.assert_equal(2.0, stats.mean([1, None, 3]))

    def test_std(self):
        nt.assert_equal(2.0, stats.std([2, 4, 4, 4, 5, 5, 7, 9]))
        nt.assert_equal(0.0, stats.std([3.5]))

    def test_pearson(self):
        nt.assert_almost_equal(1.0, stats.pearson([1, 2, 3, 4], [2, 4, 6, 8.5]), places=2)
        nt.assert_equal(0.0, stats.pearson([1, 2, 3], [5, 5, 5]))
        nt.assert_true(-1 <= stats.pearson([3, 1, 2], [1, 3, 2]) <= 1)
