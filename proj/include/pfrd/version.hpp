#pragma once

#define PFRD_VERSION_MAJOR 0
#define PFRD_VERSION_MINOR 1
#define PFRD_VERSION_PATCH 0
#define PFRD_VERSION_STRING "0.1.0"
