# -*- coding: utf-8 -*-
#
# Configuration file for the Sphinx documentation builder.
#
# Only the options pyvcr deviates from the defaults on are set. For a
# full list see http://www.sphinx-doc.org/en/master/config

# -- Project information -----------------------------------------------------

import pyvcr

project = "pyvcr"
author = "pyvcr developers"
copyright = "pyvcr developers 2021"

version = pyvcr.__version__
# The full version, including alpha/beta/rc tags
release = pyvcr.__version__


# -- General configuration ---------------------------------------------------

# napoleon reads the Google style docstrings, sphinxarg renders the
# command line parser in usage.rst
extensions = [
    "sphinx.ext.autodoc",
    "sphinx.ext.napoleon",
    "sphinx.ext.mathjax",
    "sphinx.ext.viewcode",
    "sphinx.ext.githubpages",
    "sphinxarg.ext",
]

templates_path = ["_templates"]
source_suffix = ".rst"
master_doc = "index"
language = None
exclude_patterns = []
pygments_style = None


# -- Options for HTML output -------------------------------------------------

html_theme = "sphinx_rtd_theme"
html_static_path = []
htmlhelp_basename = "pyvcrdoc"


# -- Options for other output formats ----------------------------------------

latex_documents = [(master_doc, "pyvcr.tex", "pyvcr Documentation", author, "manual")]

man_pages = [(master_doc, "pyvcr", "pyvcr Documentation", [author], 1)]

texinfo_documents = [
    (
        master_doc,
        "pyvcr",
        "pyvcr Documentation",
        author,
        "pyvcr",
        "Visually-continuous corruption robustness of image classifiers.",
        "Miscellaneous",
    )
]

epub_title = project
epub_exclude_files = ["search.html"]
