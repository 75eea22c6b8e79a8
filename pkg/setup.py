#!/usr/bin/env python3
from setuptools import setup, find_packages

# Read the README file for the long description
with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()

# Read the version from version.py
version = {}
with open("specshield/version.py", "r") as fv:
    exec(fv.read(), version)

setup(
    name="specshield",
    version=version["__version__"],
    description="Spectre-BTI/RSB hardening for RISC-V assembly",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=find_packages(include=["specshield", "specshield.*"]),
    include_package_data=True,
    install_requires=[
        "click>=8.0.0",
        "psutil>=7.0.0",
    ],
    entry_points={
        "console_scripts": [
            "specshield=specshield.cli:main",
        ],
    },
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: GNU General Public License v3 (GPLv3)",
        "Operating System :: POSIX :: Linux",
        "Development Status :: 4 - Beta",
        "Environment :: Console",
        "Topic :: Security",
        "Topic :: Software Development :: Assemblers",
    ],
    python_requires=">=3.8",
)
