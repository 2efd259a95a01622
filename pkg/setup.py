from setuptools import setup, find_packages

with open('requirements.txt') as f:
    requirements = f.readlines()

setup(
    name='chima',
    version='0.1.0',
    description='Correlation-aware high-dimensional mediation analysis',
    author='CHIMA developers',
    license='GNU GPL v3',
    packages=find_packages(exclude=('tests', 'examples', 'examples.*')),
    py_modules=['chima'],
    package_data={'chima_utils': ['use_syntax.txt']},
    install_requires=requirements,
    extras_require={'test': ['pytest>=7']},
    entry_points={'console_scripts': ['chima=chima:_entry']},
    python_requires='>=3.8',
)
