"""
NC-Chern - Writers Package

JSON and CSV result artifacts.
"""

from src.writers.result_writer import CSV_COLUMNS, SCHEMA_VERSION, build_document, write_csv, write_json

__all__ = ["CSV_COLUMNS", "SCHEMA_VERSION", "build_document", "write_csv", "write_json"]
