"""Stream runtime: sources, producer-consumer pipeline, overlays, metrics."""
