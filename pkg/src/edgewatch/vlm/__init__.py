"""Semantic video analysis: dual-stream sampling, narrative memory,
prompt assembly, dual-endpoint dispatch and verdict parsing."""
