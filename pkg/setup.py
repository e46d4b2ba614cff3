import setuptools

with open("README.md", "r") as fh:
    long_description = fh.read()

setuptools.setup(
    name="depthcontrast",
    version="0.1.0",
    author="Depth Contrast",
    description="Contrastive pretraining on paired reflectance and depth images of ore samples.",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=setuptools.find_packages(exclude=["tests", "tests.*"]),
    classifiers=[
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
        "Programming Language :: Python",
        "Programming Language :: Python :: 3",
        "Topic :: Scientific/Engineering :: Image Recognition",
    ],
    install_requires=[
        'numpy>=1.20',
        'scipy>=1.7',
        'scikit-learn>=1.0',
        'PyYAML>=5.4',
        'colorlog>=6.0',
    ],
    entry_points={
        "console_scripts": ["depthcontrast=depthcontrast.Commands:main"],
    },
    python_requires=">=3.8",
)
