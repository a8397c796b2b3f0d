from setuptools import setup, find_packages

setup(
    name='systole_lab',
    version='0.1.1',
    packages=find_packages(exclude=['examples', 'examples.*']),
    package_data={
        'systole_lab.config': ['*.toml', '*.json'],
    },
    install_requires=[
        'matplotlib',
        'numpy',
        'pydantic',
        'scipy',
        'tomli',
    ],
    entry_points={
        'console_scripts': [
            'systole-lab = systole_lab.main:main',
        ],
    },
)
