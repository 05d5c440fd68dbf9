# Copyright 2026 The Placemarks Authors.  All rights reserved.

import io
import os
import setuptools

# https://packaging.python.org/guides/making-a-pypi-friendly-readme/
this_directory = os.path.abspath(os.path.dirname(__file__))
with io.open(os.path.join(this_directory, 'README.md'), encoding='utf-8') as f:
  long_description = f.read()


INSTALL_REQUIRES = [
    'absl-py>=0.9.0',
    'jaxlib>=0.1.69',
    'jax>=0.2.17',
    'networkx>=2.4',
    'numpy>=1.18',
    'scipy>=1.4',
]


setuptools.setup(
    name='placemarks',
    version='0.0.0',
    install_requires=INSTALL_REQUIRES,
    packages=setuptools.find_packages(),
    package_data={'placemarks.tests': ['testdata/toy/*']},
    entry_points={
        'console_scripts': ['placemarks = placemarks.cli:main'],
    },
    long_description=long_description,
    long_description_content_type='text/markdown',
    description='Watermarking standard-cell placements, with attacks',
    python_requires='>=3.6',
    classifiers=[
        'Programming Language :: Python :: 3.6',
        'Programming Language :: Python :: 3.7',
        'Programming Language :: Python :: 3.8',
        'License :: OSI Approved :: Apache Software License',
        'Operating System :: MacOS',
        'Operating System :: POSIX :: Linux'
    ]
)
