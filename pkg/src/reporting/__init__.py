from .writers import FLOAT_FORMAT, read_matrix_csv, write_json, write_matrix_csv, write_table_csv

__all__ = ['FLOAT_FORMAT', 'read_matrix_csv', 'write_json', 'write_matrix_csv', 'write_table_csv']
