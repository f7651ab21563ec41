const m0 = require('chalk');
const m1 = require('debug');
const path = require('path');
module.exports = {};
