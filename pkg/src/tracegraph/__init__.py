"""Traceability knowledge-graph extraction and impact-analysis queries for C# projects."""

__version__ = "0.1.0"
