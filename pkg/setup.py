from setuptools import find_packages, setup

with open("requirements.txt") as f:
    install_requires = [
        line.split("#")[0].strip()
        for line in f
        if line.strip() and not line.startswith("#")
    ]

setup(
    name="hierband",
    version="0.1.0",
    description="Adaptive banded inverse Cholesky estimation with a hierarchical group penalty",
    packages=find_packages(include=["src", "src.*"]),
    python_requires=">=3.9",
    install_requires=install_requires,
    entry_points={
        "console_scripts": [
            "hierband=src.cli.commands:main",
        ],
    },
)
