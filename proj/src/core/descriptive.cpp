#include "descriptive.hpp"
