#pragma once

#include <stdexcept>
#include <string>

namespace breathfair {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error
{
public:
   using std::runtime_error::runtime_error;
};

/// Invalid configuration: bad parameters, unknown config keys, impossible DSP settings.
class ConfigError : public Error
{
public:
   using Error::Error;
};

/// Problems with input data: unreadable audio, malformed metadata, too few patients.
class DataError : public Error
{
public:
   using Error::Error;
};

/// Output files could not be written.
class IoError : public Error
{
public:
   using Error::Error;
};

} // namespace breathfair
