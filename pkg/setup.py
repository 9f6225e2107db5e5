from setuptools import setup, find_packages
from pathlib import Path
this_directory = Path(__file__).parent
long_description = (this_directory / "README.md").read_text()

setup(
    name="poolrate",
    version="0.1.0",
    description="Rate-distortion lower bounds on the label complexity of pool-based active learning",
    long_description = long_description,
    long_description_content_type="text/markdown",
    packages=find_packages(exclude=["scripts", "tests"]),
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
    ],
    python_requires=">=3.8",
    install_requires=[
        "joblib>=1.2.0",
        "matplotlib>=3.5",
        "numpy>=1.21",
        "pandas>=1.5",
        "scipy>=1.9",
    ],
    extras_require={
        "test": [
            "pytest>=7.0",
        ],
        "docs": [
            "sphinx>=3.0",
            "sphinx-autoapi",
            "sphinx_rtd_theme",
            "numpy>=1.21",
            "pandas>=1.5"
        ]
    },
    entry_points={
        "console_scripts": ["poolrate=poolrate.cli:run"],
    },
)
