const m0 = require('lodash');
const m1 = require('express');
const path = require('path');
module.exports = {};
