#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""The setup script."""

from setuptools import setup, find_packages

with open('README.md') as readme_file:
    readme = readme_file.read()

with open('HISTORY.rst') as history_file:
    history = history_file.read()

with open('requirements.txt') as req_file:
    requirements = [r.strip() for r in req_file if r.strip() and not r.startswith('#')]

test_requirements = []

setup(
    name='elt',
    version='0.1.0',
    description="Event detection in multivariate time series with event logic trees",
    long_description=readme + '\n\n' + history,
    packages=find_packages(include=['elt', 'elt.signal_core']),
    package_data={'elt': ['schemas/*.elt']},
    include_package_data=True,
    install_requires=requirements,
    entry_points={
        'console_scripts': ['elt=elt.cli:main'],
    },
    license="GPL-3.0",
    zip_safe=False,
    keywords='elt',
    classifiers=[
        'Development Status :: 2 - Pre-Alpha',
        'Intended Audience :: Science/Research',
        'Natural Language :: English',
        'Programming Language :: Python :: 3',
        'Programming Language :: Python :: 3.7',
        'Programming Language :: Python :: 3.8',
        'Programming Language :: Python :: 3.9',
    ],
    test_suite='tests',
    tests_require=test_requirements
)
