from setuptools import setup, find_packages

setup(
    name='tradenet_sdk',
    version='0.1.0',
    packages=find_packages(exclude=['tests', 'snippets']),
    install_requires=[
        'numpy',
        'pandas',
        'matplotlib',
        'python-dotenv',
    ],
    entry_points={
        'console_scripts': [
            'tradenet=tradenet.cli:main',
        ],
    },
    description='Trading-network markets: competitive equilibria, offer and clock dynamics, and fair core outcomes',
    classifiers=[
        'Programming Language :: Python :: 3',
        'License :: OSI Approved :: Apache Software License',
        'Operating System :: OS Independent',
    ],
    python_requires='>=3.8',
)
