"""Setup script for explosive-ar."""

from setuptools import find_packages, setup

with open("README.md", "r", encoding="utf-8") as fh:
    long_description = fh.read()

setup(
    name="explosive-ar",
    version="0.1.0",
    description="Stationary solutions, moments and limit theorems of purely explosive autoregressions",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=find_packages(include=["explosive_ar*"]),
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.11",
        "Programming Language :: Python :: 3.12",
        "Programming Language :: Python :: 3.13",
    ],
    python_requires=">=3.10",
    install_requires=[
        "click>=8.0",
        "rich>=13.0",
        "pydantic>=2.0",
        "numpy>=1.24",
        "scipy>=1.10",
        "pandas>=2.0",
        "joblib>=1.2",
        "tomli>=1.1; python_version < '3.11'",
    ],
    entry_points={
        "console_scripts": [
            "expar=explosive_ar.cli:main",
        ],
    },
)
