from setuptools import setup

setup(name='gnn_prover',
      version='0.1.0',
      description='Instantiation-based first-order prover with graph neural network guidance, run as a Django application',
      packages=['gnn_prover',
                'gnn_prover.bin',
                'gnn_prover.management',
                'gnn_prover.management.commands',
                'gnn_prover.tests'],
      install_requires=['Django>=3.2',
                        'numpy>=1.20',
                        'lark>=1.1'],
      extras_require={'test': ['pytest']},
      entry_points={'console_scripts': ['gnn-prover = gnn_prover.bin.gnn_prover:main']},
      classifiers=['Development Status :: 3 - Alpha',
                   'Environment :: Console',
                   'Framework :: Django',
                   'Intended Audience :: Science/Research',
                   'License :: OSI Approved :: BSD License',
                   'Operating System :: OS Independent',
                   'Programming Language :: Python :: 3',
                   'Topic :: Scientific/Engineering :: Artificial Intelligence'],
      )
