# Formatters module
from .output import format_table, save_output, to_json, write_csv, write_study_table
