from .iterated import SampleBatch, empirical_tail, iterated_cdf, ks_distance, sample_iterated

__all__ = ["SampleBatch", "empirical_tail", "iterated_cdf", "ks_distance", "sample_iterated"]
