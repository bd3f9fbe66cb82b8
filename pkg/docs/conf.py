#!/usr/bin/env python
# -*- coding: utf-8 -*-
#
# elt documentation build configuration file

import os
import sys

# import the package from the source tree so its version is used
sys.path.insert(0, os.path.dirname(os.path.abspath(os.path.dirname(__file__))))

import elt  # noqa: E402

extensions = ['sphinx.ext.autodoc', 'sphinx.ext.viewcode', 'sphinx.ext.napoleon']

templates_path = ['_templates']
source_suffix = '.rst'
master_doc = 'index'

project = u'Event Logic Trees'
copyright = u"2026, the elt developers"

version = elt.__version__
release = elt.__version__

exclude_patterns = ['_build']
pygments_style = 'sphinx'

html_theme = 'default'
html_static_path = []
htmlhelp_basename = 'eltdoc'

latex_documents = [
    ('index', 'elt.tex', u'Event Logic Trees Documentation',
     u'the elt developers', 'manual'),
]

man_pages = [
    ('index', 'elt', u'Event Logic Trees Documentation',
     [u'the elt developers'], 1)
]
