#pragma once

#define SPRINTSIM_VERSION "1.0.0"
