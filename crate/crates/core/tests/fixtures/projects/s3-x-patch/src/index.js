const m0 = require('react');
const m1 = require('moment');
const path = require('path');
module.exports = {};
