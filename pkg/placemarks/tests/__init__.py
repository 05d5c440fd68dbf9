# Copyright 2026 The Placemarks Authors.  All rights reserved.
