"""Two-dimensional MDL histograms: NML code lengths, 1-D MDL histograms and
the partition-then-merge search for 2-D partitions."""

__version__ = "0.1.0"
