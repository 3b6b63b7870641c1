#!/usr/bin/env python3
"""
Setup script for the NoiseGrad explanation lab
"""

import os
import subprocess
import sys

sys.path.append(os.path.dirname(os.path.abspath(__file__)))


def install_requirements():
    """Install Python requirements"""
    print("Installing Python requirements...")
    subprocess.check_call([sys.executable, '-m', 'pip', 'install', '-r', 'requirements.txt'])


def create_directories():
    """Create necessary directories"""
    dirs = [
        'logs',
        'runs',
    ]

    for dir_name in dirs:
        os.makedirs(dir_name, exist_ok=True)
        print(f"Created directory: {dir_name}")


def create_example_configs():
    """Write editable experiment files with every default"""
    from config.loader import write_example_config

    write_example_config('experiment.example.ini', kind='glyph')
    write_example_config('experiment.toy.ini', kind='toy')
    print("Created experiment.example.ini and experiment.toy.ini")


def create_env_file():
    """Create environment file template"""
    env_content = """# NoiseGrad explanation lab environment variables

# Default output directory when --out is not given
GNLAB_OUT_DIR=./runs/default

# Logging
GNLAB_LOG_LEVEL=INFO
GNLAB_LOG_FILE=./logs/gnlab.log
"""

    with open('.env.example', 'w') as f:
        f.write(env_content)
    print("Created .env.example file")


def main():
    print("Setting up NoiseGrad explanation lab...")
    print("="*50)

    try:
        install_requirements()
        print("✅ Python requirements installed")
    except Exception as e:
        print(f"❌ Failed to install requirements: {e}")
        return False

    create_directories()
    print("✅ Directories created")

    create_example_configs()
    print("✅ Example configs created")

    create_env_file()
    print("✅ Environment template created")

    print("\n" + "="*50)
    print("SETUP COMPLETE!")
    print("="*50)
    print("Next steps:")
    print("1. Run the tests: pytest -m 'not slow'")
    print("2. Try the toy demo: python demo.py")
    print("3. Train the glyph model: python main.py --out runs/glyph train")
    print("4. Compare enhancers: python main.py --out runs/glyph compare")

    return True


def build_package():
    """Package metadata for pip / setuptools build frontends"""
    from setuptools import setup

    setup(
        name='noisegrad-lab',
        version='0.1.0',
        description='NoiseGrad explanation lab',
        packages=['calibration', 'config', 'data', 'enhancers', 'explainers',
                  'global_am', 'metrics', 'nn', 'utils'],
        py_modules=['main', 'dispatcher', 'demo'],
        python_requires='>=3.8',
        install_requires=[
            'numpy>=1.22.0',
            'scipy>=1.9.0',
            'pandas>=1.3.0',
            'matplotlib>=3.5.0',
            'Pillow>=9.0.0',
            'joblib>=1.1.0',
        ],
        extras_require={'test': ['pytest>=7.0.0']},
    )


if __name__ == "__main__":
    if len(sys.argv) > 1:
        # invoked by a build frontend (pip, setuptools) with a command such as egg_info
        build_package()
    else:
        main()
