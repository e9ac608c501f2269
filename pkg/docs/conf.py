#
# dampkdv documentation build configuration file.
#
# This file is execfile()d with the current directory set to its
# containing dir.

import os
import sys


# If extensions (or modules to document with autodoc) are in another directory,
# add these directories to sys.path here.
sys.path.insert(0, os.path.abspath(".."))

import dampkdv  # noqa: E402


# -- General configuration ------------------------------------------------

extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.napoleon",
    "sphinx.ext.intersphinx",
    "sphinx.ext.todo",
    "sphinx.ext.viewcode",
    "sphinx_click",
    "myst_parser",
]

templates_path = ["_templates"]
source_suffix = ".rst"
master_doc = "index"

project = "dampkdv"
copyright = "2024, dampkdv Developers"
author = "dampkdv Developers"

version = dampkdv.__version__
release = dampkdv.__version__

language = "en"
exclude_patterns = ["_build"]

add_function_parentheses = True
add_module_names = True
todo_include_todos = True

# -- Options for HTML output ----------------------------------------------

html_theme = "furo"
html_show_sourcelink = False
html_show_sphinx = False
html_show_copyright = True
htmlhelp_basename = "dampkdvdoc"

# -- Options for manual page output ---------------------------------------

man_pages = [(master_doc, "dampkdv", "dampkdv Documentation", [author], 1)]

intersphinx_mapping = {
    "python": ("https://docs.python.org/3", None),
    "numpy": ("https://numpy.org/doc/stable/", None),
    "pandas": ("https://pandas.pydata.org/pandas-docs/stable/", None),
}
