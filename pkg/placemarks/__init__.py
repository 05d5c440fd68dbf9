# Copyright 2026 The Placemarks Authors.  All rights reserved.

from placemarks import attacks
from placemarks import baselines
from placemarks import dw
from placemarks import gw
from placemarks import icmarks
from placemarks import metrics
from placemarks import netlist
from placemarks import placer
from placemarks.icmarks import extract_certificate
from placemarks.icmarks import insert_icmarks
from placemarks.icmarks import watermark
from placemarks.netlist import generate_synthetic
from placemarks.netlist import parse_bookshelf
from placemarks.placer import run_pipeline
