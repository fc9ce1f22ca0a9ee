#!/usr/bin/env python
# -*- coding: utf-8 -*-

# This Source Code Form is subject to the terms of the Mozilla Public
# License, v. 2.0. If a copy of the MPL was not distributed with this
# file, You can obtain one at http://mozilla.org/MPL/2.0/.

"""The setup script."""

import sys

from setuptools import setup, find_packages


if sys.version_info < (3, 7):
    print(
        "sdflow requires at least Python 3.7",
        file=sys.stderr
    )
    sys.exit(1)


with open('README.rst') as readme_file:
    readme = readme_file.read()

with open('HISTORY.rst') as history_file:
    history = history_file.read()

requirements = [
    'Click>=7.0',
    'PyYAML>=3.13',
    'jsonschema>=3.0.2',
    'inflection>=0.3.1',
    'Jinja2>=2.10.1',
    'numpy>=1.16',
    'networkx>=2.3',
]

setup_requirements = ['pytest-runner', 'setuptools-scm']

test_requirements = ['pytest', 'hypothesis']

setup(
    classifiers=[
        'Development Status :: 2 - Pre-Alpha',
        'Intended Audience :: Science/Research',
        'Natural Language :: English',
        'Programming Language :: Python :: 3',
        'Programming Language :: Python :: 3.7',
        'Topic :: Scientific/Engineering',
    ],
    description="System dynamics models: a small language, a simulator and "
                "policy experiments on algorithmic bias in healthcare",
    entry_points={
        'console_scripts': [
            'sdflow=sdflow.__main__:main',
        ],
    },
    install_requires=requirements,
    long_description=readme + '\n\n' + history,
    include_package_data=True,
    package_data={
        'sdflow': [
            'model/*.sdm',
            'model/*.yaml',
            'schemas/*.yaml',
            'templates/*.jinja2',
            'fixtures/*.sdm',
            'fixtures/errors/*.sdm',
        ],
    },
    keywords='sdflow system-dynamics simulation',
    name='sdflow',
    packages=find_packages(include=['sdflow']),
    setup_requires=setup_requirements,
    test_suite='tests',
    tests_require=test_requirements,
    zip_safe=False,
    use_scm_version=True
)
