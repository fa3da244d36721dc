from setuptools import setup, find_packages

setup(
    name="blockspin",
    version="0.1.0",
    packages=find_packages(exclude=["tests", "tests.*", "examples", "examples.*"]),
    py_modules=['main', 'globals', 'errors'],
    install_requires=[
        "numpy>=1.26",
        "scipy>=1.11",
        "numba>=0.59",
        "matplotlib>=3.8",
        "prometheus-client>=0.20.0",
    ],
    entry_points={
        'console_scripts': [
            'blockspin=main:main',
        ],
    },
    author="Timandes White",
    author_email="timandes@gmail.com",
    description="Block-spin mean-field Ising toolkit",
    long_description=open("README.md").read(),
    long_description_content_type="text/markdown",
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: Apache Software License",
        "Operating System :: OS Independent",
    ],
    python_requires=">=3.11",
)
