const _ = require('lodash');
const chalk = require('chalk');
