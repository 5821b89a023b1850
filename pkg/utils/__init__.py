# utils/__init__.py

from .number_utils import NumberUtils
from .file_handler import FileHandler, render_csv, render_json, render_summary

__all__ = ['NumberUtils', 'FileHandler', 'render_csv', 'render_json', 'render_summary']
