import os
from setuptools import setup

setup(
    name = "libdefer",
    version = "0.3.dev",
    author = "DEFER Team",
    description = ("libdefer: black-box density estimation by recursive ternary partitioning"),
    license = "BSD",
    keywords = "density estimation evidence partitioning sampling",
    packages=['libdefer', 'libdefer.util', 'libdefer.criteria', 'libdefer.density', 'tools'],
    package_data={'tools' : ['*.py']},
    include_package_data = True,
    install_requires=[
        "setuptools",
        "lace @ git+https://github.com/periscope-ps/lace.git@master",
        "jsonschema",
        "numpy",
        "scipy",
        "shewchuk",
    ],
    extras_require={
        "test": ["pytest"],
    },
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Topic :: Scientific/Engineering :: Mathematics",
        "License :: OSI Approved :: BSD License",
        ],
    entry_points = {
        'console_scripts': [
            'defer = tools.defer_cli:main',
            'defer_summary = tools.bench_summary:main',
        ]
    },
)
