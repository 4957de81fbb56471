#!/usr/bin/env python
from setuptools import find_packages, setup


project = "zk-coder"
version = "0.1.0"


setup(
    name=project,
    version=version,
    description="Sketch-guided generation, compilation and testing of zero-knowledge verifier programs",
    long_description=open("README.md").read(),
    long_description_content_type="text/markdown",
    packages=find_packages(exclude=["*.tests", "*.tests.*", "tests.*", "tests"]),
    include_package_data=True,
    package_data={
        "zk_coder": [
            "data/kb/*.yaml",
            "data/prompts/*/*.txt",
            "data/tasks/*.yaml",
        ],
    },
    zip_safe=False,
    python_requires=">=3.7",
    install_requires=[
        "networkx>=2.4",
        "numpy>=1.13.1",
        "PyYAML>=5.1",
        "requests>=2.20.0",
        "scikit-learn>=0.19.0",
    ],
    extras_require={
        "test": [
            "PyHamcrest>=1.9.0",
            "coverage>=3.7.1",
            "parameterized>=0.7.1",
            "pytest>=6.0",
        ],
        "progress": [
            "tqdm>=4.0",
        ],
    },
    entry_points={
        "console_scripts": [
            "zk-coder = zk_coder.cli:main",
        ],
    },
)
