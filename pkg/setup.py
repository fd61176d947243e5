from setuptools import setup, find_packages

setup(
    name="nqe-hkg",
    version="0.1.0",
    packages=find_packages(exclude=["tests"]),
    python_requires=">=3.10",
    install_requires=[
        "torch",
        "numpy",
        "pandas",
        "pydantic",
        "pydantic-settings",
        "python-dotenv",
        "click",
        "tqdm",
        "tomli; python_version < '3.11'",
    ],
    entry_points={
        "console_scripts": [
            "nqe=src.app:main",
        ],
    },
)
