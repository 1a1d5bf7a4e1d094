"""Serialization helpers."""

from .csv import load_rows_csv, read_records, rows_from_csv, rows_to_csv, save_rows_csv
from .json import (
    config_from_json,
    load_config_json,
    load_mesh_json,
    load_report_json,
    mesh_from_document,
    mesh_from_json,
    mesh_to_document,
    mesh_to_json,
    report_from_json,
    report_to_json,
    save_mesh_json,
    save_report_json,
    space_from_json,
    space_to_document,
    space_to_json,
)
from .matrix import load_matrix_market, load_vector, save_matrix_market, save_vector

__all__ = [
    "config_from_json",
    "load_config_json",
    "load_matrix_market",
    "load_mesh_json",
    "load_report_json",
    "load_rows_csv",
    "load_vector",
    "mesh_from_document",
    "mesh_from_json",
    "mesh_to_document",
    "mesh_to_json",
    "read_records",
    "report_from_json",
    "report_to_json",
    "rows_from_csv",
    "rows_to_csv",
    "save_matrix_market",
    "save_mesh_json",
    "save_report_json",
    "save_rows_csv",
    "save_vector",
    "space_from_json",
    "space_to_document",
    "space_to_json",
]
