#pragma once

#define LOYNES_VERSION "0.1.0"
