# stigmergy-canvas tests
