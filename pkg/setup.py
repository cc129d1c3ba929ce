#!/usr/bin/env python

from os.path import exists
from setuptools import setup, find_packages

from map_stability import __version__

setup(
    name='map-stability',
    version=__version__,
    packages=find_packages(exclude=['tests', 'tests.*']),
    scripts=[],
    license='MIT',
    description='Temporal stability metrics for vectorized online map predictions',
    long_description=open('README.rst').read() if exists("README.rst") else "",
    install_requires=[
        'numpy',
        'scipy',
        'plaster',
        'plaster_pastedeploy',
        'pyramid',
        'webob',
        'wtforms',
    ],
    tests_require=[
        'pytest',
    ],
    test_suite='tests',
    entry_points="""\
    [console_scripts]
    map-stability = map_stability.scripts.cli:console_main
    """,
)
