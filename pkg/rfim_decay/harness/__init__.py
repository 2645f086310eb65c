"""Experiment orchestration: scale partitions, the decay sweep and the lemma suite."""
