#include "distinguish.hpp"
